"""Subspace geometry: principal angles, distances and explicit embeddings.

A p-dimensional subspace of R^d is represented by an orthonormal d x p
basis matrix.  All quantities defined here depend only on the span, never
on the particular basis, and the tests hold the implementations to that.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .exceptions import (DegenerateRatio, DimensionMismatch,
                         EmbeddingTooLarge)

EMBEDDING_CAP = 10_000

_ORTHONORMALITY_TOL = 1e-10
_PROJECTOR_EQ_TOL = 1e-8
_UNIT_NORM_TOL = 1e-10


class Subspace:
    """A p-dimensional linear subspace of R^d.

    Held as an orthonormal d x p basis matrix, validated on construction
    and frozen afterwards.  Equality compares orthogonal projectors, so
    two different bases spanning the same subspace compare equal.

    Parameters
    ----------
    basis : array_like, shape (d, p)
        Matrix with orthonormal columns, 0 < p < d.
    """

    __slots__ = ("basis",)

    def __init__(self, basis):
        basis = numerics.as_matrix(basis).copy()
        d, p = basis.shape
        if not 0 < p < d:
            raise DimensionMismatch(
                f"subspace dimensions need 0 < p < d, got d={d}, p={p}")
        gram = basis.T @ basis
        defect = np.max(np.abs(gram - np.eye(p)))
        if defect > _ORTHONORMALITY_TOL:
            raise ValueError(
                f"basis columns are not orthonormal (defect {defect:.3e}); "
                "pass the matrix through numerics.orthonormalize first")
        basis.setflags(write=False)
        self.basis = basis

    @property
    def d(self):
        return self.basis.shape[0]

    @property
    def p(self):
        return self.basis.shape[1]

    def projector(self):
        """The orthogonal projector onto the subspace, a d x d matrix."""
        return self.basis @ self.basis.T

    def rotated(self, rotation):
        """The same subspace under a p x p orthogonal change of basis."""
        return Subspace(self.basis @ numerics.as_matrix(rotation))

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        if self.basis.shape != other.basis.shape:
            return False
        gap = np.max(np.abs(self.projector() - other.projector()))
        return bool(gap <= _PROJECTOR_EQ_TOL)

    __hash__ = None

    def __repr__(self):
        return f"Subspace(d={self.d}, p={self.p})"


@dataclass(frozen=True)
class PrincipalAngles:
    """Principal angles between two subspaces, ascending, each in [0, pi/2]."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=np.float64)
        if a.ndim != 1 or a.size == 0:
            raise DimensionMismatch("angles must form a nonempty vector")
        if np.any(a < 0.0) or np.any(a > np.pi / 2 + 1e-12):
            raise ValueError("principal angles must lie in [0, pi/2]")
        if np.any(np.diff(a) < 0.0):
            raise ValueError("principal angles must be ascending")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.angles, dtype=dtype)

    def __len__(self):
        return self.angles.size

    def norm(self):
        """Euclidean norm of the angle vector."""
        return float(np.linalg.norm(self.angles))


@dataclass(frozen=True)
class PluckerVector:
    """Unit-norm vector of p x p minors indexing a point on the Grassmannian.

    Coordinates follow lexicographic order of the row subsets, so for a
    4 x 2 basis the six entries use rows (0,1), (0,2), (0,3), (1,2),
    (1,3), (2,3).
    """

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.float64)
        if c.ndim != 1 or c.size == 0:
            raise DimensionMismatch("coordinates must form a nonempty vector")
        norm = np.linalg.norm(c)
        if abs(norm - 1.0) > _UNIT_NORM_TOL:
            raise ValueError(f"coordinates must have unit norm, got {norm!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def __len__(self):
        return self.coords.size


def _check_pair(x, y):
    if not isinstance(x, Subspace) or not isinstance(y, Subspace):
        raise TypeError("expected Subspace operands")
    if x.basis.shape != y.basis.shape:
        raise DimensionMismatch(
            f"subspaces live on different manifolds: "
            f"(d={x.d}, p={x.p}) vs (d={y.d}, p={y.p})")


def principal_angles(x, y):
    """Principal angles between two subspaces of the same manifold.

    Computed as arccos of the singular values of x.T @ y, with the
    cosines clamped into [0, 1] first because roundoff routinely pushes
    them a few ulp outside.
    """
    _check_pair(x, y)
    cosines = np.linalg.svd(x.basis.T @ y.basis, compute_uv=False)
    theta = np.arccos(np.clip(cosines, 0.0, 1.0))
    return PrincipalAngles(np.sort(theta))


def geodesic_distance(x, y):
    """Arc length of the shortest path between two subspaces.

    Equals the Euclidean norm of the principal angle vector.
    """
    return principal_angles(x, y).norm()


def bc_inner(x, y):
    """Absolute determinant of x.T @ y, the product of angle cosines."""
    _check_pair(x, y)
    return abs(numerics.determinant(x.basis.T @ y.basis))


def proj_inner(x, y):
    """Squared Frobenius norm of x.T @ y, the sum of squared cosines."""
    _check_pair(x, y)
    return float(np.sum((x.basis.T @ y.basis) ** 2))


def bc_distance_sq(x, y):
    """Squared chordal distance induced by the determinant similarity.

    Defined as 2 - 2 * |det(x.T @ y)|; zero exactly when the subspaces
    coincide and at most 2 when they share no direction.
    """
    return 2.0 - 2.0 * bc_inner(x, y)


def proj_distance_sq(x, y):
    """Squared distance between orthogonal projectors, 2p - 2 * proj_inner."""
    _check_pair(x, y)
    return 2.0 * x.p - 2.0 * proj_inner(x, y)


def plucker_embed(x, cap=EMBEDDING_CAP):
    """Vector of all p x p minors of the basis, in lexicographic row order.

    The result has choose(d, p) coordinates and unit norm.  Raises
    EmbeddingTooLarge when the coordinate count exceeds `cap`; the
    default cap keeps accidental use on large manifolds from allocating
    astronomically long vectors.
    """
    if not isinstance(x, Subspace):
        raise TypeError("expected a Subspace")
    n_coords = math.comb(x.d, x.p)
    if n_coords > cap:
        raise EmbeddingTooLarge(
            f"embedding needs {n_coords} coordinates, cap is {cap}")
    coords = np.empty(n_coords)
    for k, rows in enumerate(itertools.combinations(range(x.d), x.p)):
        coords[k] = numerics.determinant(x.basis[list(rows), :])
    # minors of an orthonormal basis already have unit total norm;
    # normalize anyway so the invariant holds bit-for-bit
    coords /= np.linalg.norm(coords)
    return PluckerVector(coords)


def projection_embed(x):
    """The orthogonal projector x @ x.T as an explicit d x d embedding."""
    if not isinstance(x, Subspace):
        raise TypeError("expected a Subspace")
    return x.projector()


def compound_matrix(m, q, cap=EMBEDDING_CAP):
    """Matrix of all q x q minors of m, rows and columns lexicographic.

    Entry (i, j) is the minor of m taken from the i-th q-subset of rows
    and the j-th q-subset of columns.  Satisfies the product identity
    compound(a @ b, q) = compound(a, q) @ compound(b, q).
    """
    m = numerics.as_matrix(m)
    r, c = m.shape
    if not 1 <= q <= min(r, c):
        raise DimensionMismatch(
            f"minor order q={q} out of range for shape {m.shape}")
    n_rows = math.comb(r, q)
    n_cols = math.comb(c, q)
    if n_rows * n_cols > cap:
        raise EmbeddingTooLarge(
            f"compound matrix has {n_rows} x {n_cols} entries, cap is {cap}")
    row_subsets = list(itertools.combinations(range(r), q))
    col_subsets = list(itertools.combinations(range(c), q))
    out = np.empty((n_rows, n_cols))
    for i, rows in enumerate(row_subsets):
        block = m[list(rows), :]
        for j, cols in enumerate(col_subsets):
            out[i, j] = numerics.determinant(block[:, list(cols)])
    return out


def curve_length_ratio(x, y):
    """Ratio of the squared overlap chordal distance to the squared geodesic.

    The numerator is 2 - 2 * det(x.T @ y)^2.  As the two subspaces
    approach each other the ratio tends to 2, which bounds how much the
    chordal distance can understate arc length locally.  Undefined for
    identical subspaces.
    """
    _check_pair(x, y)
    geo = geodesic_distance(x, y)
    if x == y or geo == 0.0:
        raise DegenerateRatio(
            "curve length ratio is undefined for identical subspaces")
    overlap = bc_inner(x, y)
    return (2.0 - 2.0 * overlap * overlap) / (geo * geo)


def random_subspace(d, p, rng):
    """A uniformly distributed subspace, from an orthonormalized Gaussian."""
    if not 0 < p < d:
        raise DimensionMismatch(
            f"subspace dimensions need 0 < p < d, got d={d}, p={p}")
    return Subspace(numerics.orthonormalize(rng.standard_normal((d, p))))


def subspace_pair_with_angles(d, p, angles, rng):
    """A random pair of subspaces with exactly the given principal angles.

    Draws a Haar 2p-frame, takes its first p columns as x, and tilts each
    of those columns toward a distinct complementary frame column by the
    corresponding angle.  Needs d >= 2p and ascending angles in [0, pi/2].
    """
    a = np.asarray(angles, dtype=np.float64)
    if a.shape != (p,):
        raise DimensionMismatch(f"need {p} angles, got shape {a.shape}")
    if 2 * p > d:
        raise DimensionMismatch(f"need d >= 2p to realize all angles "
                                f"(d={d}, p={p})")
    PrincipalAngles(np.sort(a))  # reuse the range validation
    frame = numerics.orthonormalize(rng.standard_normal((d, 2 * p)))
    x = frame[:, :p]
    normals = frame[:, p:]
    y = x * np.cos(a) + normals * np.sin(a)
    return Subspace(x), Subspace(y)


def tilt_subspace(x, angles, rng):
    """Rotate the basis columns of x toward random orthogonal directions.

    Column i moves by angles[i] toward the i-th column of a random
    orthonormal frame drawn inside the orthogonal complement of x.  When
    the complement is narrower than p only the first d - p columns can
    move; the remaining angles are ignored.
    """
    if not isinstance(x, Subspace):
        raise TypeError("expected a Subspace")
    a = np.asarray(angles, dtype=np.float64)
    if a.ndim != 1 or a.size != x.p:
        raise DimensionMismatch(f"need {x.p} angles, got {a!r}")
    k = min(x.p, x.d - x.p)
    raw = rng.standard_normal((x.d, k))
    raw -= x.basis @ (x.basis.T @ raw)
    normals = numerics.orthonormalize(raw)
    basis = x.basis.copy()
    basis[:, :k] = basis[:, :k] * np.cos(a[:k]) + normals * np.sin(a[:k])
    return Subspace(basis)
