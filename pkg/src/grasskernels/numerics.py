"""Dense float64 matrix primitives backed by LAPACK through numpy and scipy.

Everything downstream funnels its linear algebra through these helpers so
that validation, fallback and tolerance policy live in one place.
"""

import numpy as np
import scipy.linalg

from .exceptions import ConvergenceFailure, DimensionMismatch, RankDeficient

RANK_TOLERANCE = 1e-10


def as_matrix(values):
    """Coerce input to a 2-D float64 array with finite entries."""
    m = np.asarray(values, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D array, got ndim={m.ndim}")
    if m.size == 0:
        raise DimensionMismatch("matrix must have at least one entry")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def _require_square(m, what):
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{what} needs a square matrix, got {m.shape}")


def svd(m):
    """Thin singular value decomposition m = u @ diag(s) @ v.T.

    Returns (u, s, v) with s nonnegative and sorted descending.  The
    divide-and-conquer driver occasionally fails on ill-conditioned input,
    in which case the plain QR-iteration driver is tried before giving up.
    """
    m = as_matrix(m)
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        try:
            u, s, vt = scipy.linalg.svd(m, full_matrices=False,
                                        lapack_driver="gesvd")
        except scipy.linalg.LinAlgError as exc:
            # 6 QR sweeps per singular value is the LAPACK budget
            budget = 6 * min(m.shape) ** 2
            raise ConvergenceFailure(
                f"SVD did not converge: {exc}", iterations=budget) from exc
    return u, s, vt.T


def singular_values(m):
    """Singular values only, descending."""
    return svd(m)[1]


def orthonormalize(m):
    """Orthonormal basis spanning the columns of m, preserving column order.

    Uses QR with the diagonal of R forced positive, so an input that is
    already orthonormal (or diagonal with positive entries) comes back
    without sign flips.  Raises RankDeficient when the smallest singular
    value falls below RANK_TOLERANCE times the largest.
    """
    m = as_matrix(m)
    d, p = m.shape
    if d < p:
        raise RankDeficient(f"cannot orthonormalize {p} columns in R^{d}")
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0.0 or s[-1] < RANK_TOLERANCE * s[0]:
        raise RankDeficient(
            f"column rank below {p}: singular value ratio "
            f"{s[-1]:.3e} / {s[0]:.3e}")
    q, r = np.linalg.qr(m)
    signs = np.sign(np.diag(r))
    signs[signs == 0.0] = 1.0
    return q * signs


def symmetric_eigenvalues(m):
    """Eigenvalues of the symmetric part (m + m.T) / 2, ascending."""
    m = as_matrix(m)
    _require_square(m, "eigenvalue computation")
    return np.linalg.eigvalsh((m + m.T) / 2.0)


def determinant(m):
    """Determinant of a square matrix."""
    m = as_matrix(m)
    _require_square(m, "determinant")
    return float(np.linalg.det(m))
