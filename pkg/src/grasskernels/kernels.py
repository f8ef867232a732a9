"""The kernel catalog on subspaces, Gram assembly and spectral certification.

Every kernel is a scalar function of one of two basis-invariant
similarities between subspaces x and y:

* the determinant similarity |det(x.T @ y)|, written s below, with
  s in [0, 1];
* the projection similarity ||x.T @ y||_F^2, with s in [0, p].

Families and their validity:

===========  =====================================  ==================
family       value                                  certification
===========  =====================================  ==================
baseline     s^2 (determinant) or s (projection)    positive definite
linear       s                                      positive definite
polynomial   (beta + s)^alpha                       positive definite
rbf          exp(beta * s)                          positive definite
laplace      exp(-beta * sqrt(smax - s))            positive definite
binomial     (beta - s)^-alpha                      positive definite
logarithm    -log(smax + 1 - s)                     conditionally pd
===========  =====================================  ==================

where smax is 1 for the determinant embedding and p for the projection
embedding.  Parameter constraints are enforced eagerly by KernelSpec.

The certification column is the advertised target that certify_pd
checks.  Projection-embedding kernels meet it: the underlying similarity
is an inner product of projectors.  The determinant-embedding similarity
is not bilinear, and on sampled subspaces the polynomial, rbf and
binomial determinant kernels routinely miss the target, as does the
determinant logarithm in its conditional mode; the laplace and squared
baseline forms are the empirically robust determinant-side choices.
Run the pd-check task to see the verdicts on any dataset.
"""

import hashlib
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import grassmann, numerics
from .exceptions import DimensionMismatch, InvalidKernelParameter

EMBEDDINGS = ("binet_cauchy", "projection")
FAMILIES = ("baseline", "linear", "polynomial", "rbf", "laplace",
            "binomial", "logarithm")

# families whose natural certification mode is conditionally pd
CPD_FAMILIES = ("logarithm",)

PD_TOLERANCE = 1e-8

_EMBEDDING_ALIASES = {
    "bc": "binet_cauchy",
    "binet_cauchy": "binet_cauchy",
    "binet-cauchy": "binet_cauchy",
    "proj": "projection",
    "projection": "projection",
}
_EMBEDDING_SHORT = {"binet_cauchy": "bc", "projection": "projection"}

_NEEDS_BETA = ("polynomial", "rbf", "laplace", "binomial")
_NEEDS_ALPHA = ("polynomial", "binomial")


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family with parameters, validated on construction.

    Parameters
    ----------
    embedding : str
        "binet_cauchy" or "projection" (aliases "bc" and "proj" accepted).
    family : str
        One of FAMILIES.
    p : int
        Subspace dimension the kernel will be evaluated on.  Needed up
        front because the binomial projection constraint depends on it.
    alpha : float, optional
        Exponent; integer >= 1 for polynomial, any positive real for
        binomial, disallowed elsewhere.
    beta : float, optional
        Scale; positive for polynomial / rbf / laplace, > 1 for binomial
        on the determinant embedding and > p on the projection embedding,
        disallowed elsewhere.
    """

    embedding: str
    family: str
    p: int
    alpha: Optional[float] = None
    beta: Optional[float] = None

    def __post_init__(self):
        embedding = _EMBEDDING_ALIASES.get(str(self.embedding))
        if embedding is None:
            raise InvalidKernelParameter(
                f"unknown embedding {self.embedding!r}; "
                f"pick one of {EMBEDDINGS}")
        object.__setattr__(self, "embedding", embedding)
        if self.family not in FAMILIES:
            raise InvalidKernelParameter(
                f"unknown family {self.family!r}; pick one of {FAMILIES}")
        if not (isinstance(self.p, (int, np.integer)) and self.p >= 1):
            raise InvalidKernelParameter(
                f"subspace dimension must be a positive integer, "
                f"got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))
        self._check_param("alpha", self.alpha, self.family in _NEEDS_ALPHA)
        self._check_param("beta", self.beta, self.family in _NEEDS_BETA)
        if self.alpha is not None:
            object.__setattr__(self, "alpha", float(self.alpha))
        if self.beta is not None:
            object.__setattr__(self, "beta", float(self.beta))
        self._check_ranges()

    def _check_param(self, name, value, needed):
        if needed and value is None:
            raise InvalidKernelParameter(
                f"family {self.family!r} requires {name}")
        if not needed and value is not None:
            raise InvalidKernelParameter(
                f"family {self.family!r} takes no {name}")
        if value is not None and not math.isfinite(float(value)):
            raise InvalidKernelParameter(f"{name} must be finite")

    def _check_ranges(self):
        a, b = self.alpha, self.beta
        if self.family == "polynomial":
            if b <= 0.0:
                raise InvalidKernelParameter(
                    f"polynomial kernel needs beta > 0, got {b}")
            if a < 1.0 or not float(a).is_integer():
                raise InvalidKernelParameter(
                    f"polynomial kernel needs an integer alpha >= 1, got {a}")
        elif self.family in ("rbf", "laplace"):
            if b <= 0.0:
                raise InvalidKernelParameter(
                    f"{self.family} kernel needs beta > 0, got {b}")
        elif self.family == "binomial":
            if a <= 0.0:
                raise InvalidKernelParameter(
                    f"binomial kernel needs alpha > 0, got {a}")
            lower = 1.0 if self.embedding == "binet_cauchy" else float(self.p)
            if b <= lower:
                raise InvalidKernelParameter(
                    f"binomial kernel on the {self.embedding} embedding "
                    f"needs beta > {lower:g}, got {b}")

    @property
    def similarity_max(self):
        """Largest value the underlying similarity can take."""
        return 1.0 if self.embedding == "binet_cauchy" else float(self.p)

    @property
    def certification_mode(self):
        """'cpd' for families that are only conditionally pd, else 'pd'."""
        return "cpd" if self.family in CPD_FAMILIES else "pd"

    def label(self):
        """Compact token, e.g. 'rbf:projection:beta=0.5' or 'linear:bc'."""
        parts = [self.family, _EMBEDDING_SHORT[self.embedding]]
        if self.alpha is not None:
            parts.append(f"alpha={self.alpha!r}")
        if self.beta is not None:
            parts.append(f"beta={self.beta!r}")
        return ":".join(parts)

    def to_kv(self):
        """Key=value record, one field per line, empty value for unset."""
        alpha = "" if self.alpha is None else repr(self.alpha)
        beta = "" if self.beta is None else repr(self.beta)
        return (f"embedding={self.embedding}\nfamily={self.family}\n"
                f"alpha={alpha}\nbeta={beta}")


def spec_from_kv(text, p):
    """Rebuild a KernelSpec from its key=value record.

    The subspace dimension is not part of the record; it is bound here
    from the dataset the spec is applied to.
    """
    fields = {}
    for line in text.strip().splitlines():
        if "=" not in line:
            raise InvalidKernelParameter(
                f"malformed kernel record line {line!r}")
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    missing = {"embedding", "family", "alpha", "beta"} - set(fields)
    if missing:
        raise InvalidKernelParameter(
            f"kernel record is missing fields: {sorted(missing)}")
    alpha = float(fields["alpha"]) if fields["alpha"] else None
    beta = float(fields["beta"]) if fields["beta"] else None
    return KernelSpec(embedding=fields["embedding"], family=fields["family"],
                      p=p, alpha=alpha, beta=beta)


def parse_kernel_token(token, p):
    """Parse a compact token like 'rbf:projection:beta=0.5'.

    Grammar: family:embedding[:alpha=A][:beta=B].  Embedding accepts the
    aliases understood by KernelSpec.
    """
    parts = [part.strip() for part in str(token).split(":")]
    if len(parts) < 2:
        raise InvalidKernelParameter(
            f"kernel token {token!r} needs at least family:embedding")
    family, embedding = parts[0], parts[1]
    alpha = None
    beta = None
    for part in parts[2:]:
        key, eq, value = part.partition("=")
        if not eq:
            raise InvalidKernelParameter(
                f"kernel token parameter {part!r} must look like key=value")
        try:
            value = float(value)
        except ValueError:
            raise InvalidKernelParameter(
                f"kernel token parameter {part!r} has a non-numeric value")
        if key == "alpha":
            alpha = value
        elif key == "beta":
            beta = value
        else:
            raise InvalidKernelParameter(
                f"kernel token parameter {key!r} not recognized")
    return KernelSpec(embedding=embedding, family=family, p=p,
                      alpha=alpha, beta=beta)


def evaluate(spec, x, y):
    """Evaluate the kernel on a pair of subspaces."""
    if x.basis.shape != y.basis.shape:
        raise DimensionMismatch(
            f"subspaces live on different manifolds: "
            f"(d={x.d}, p={x.p}) vs (d={y.d}, p={y.p})")
    if x.p != spec.p:
        raise DimensionMismatch(
            f"kernel was configured for p={spec.p}, data has p={x.p}")
    if spec.embedding == "binet_cauchy":
        s = grassmann.bc_inner(x, y)
    else:
        s = grassmann.proj_inner(x, y)
    return _apply(spec, s)


def _apply(spec, s):
    family = spec.family
    if family == "baseline":
        return s * s if spec.embedding == "binet_cauchy" else s
    if family == "linear":
        return s
    if family == "polynomial":
        return (spec.beta + s) ** spec.alpha
    if family == "rbf":
        return math.exp(spec.beta * s)
    if family == "laplace":
        # roundoff can push s a hair past its maximum; clamp the radicand
        return math.exp(-spec.beta * math.sqrt(max(spec.similarity_max - s,
                                                   0.0)))
    if family == "binomial":
        return (spec.beta - s) ** -spec.alpha
    return -math.log(spec.similarity_max + 1.0 - s)


def subspace_fingerprint(data):
    """Content hash of a sequence of subspaces, order sensitive."""
    digest = hashlib.sha256()
    for x in data:
        digest.update(f"{x.d}x{x.p};".encode())
        digest.update(np.ascontiguousarray(x.basis).tobytes())
    return digest.hexdigest()


@dataclass(frozen=True)
class GramMatrix:
    """A symmetric kernel matrix bound to its kernel and source data.

    `spec` is None for matrices built from functions outside the catalog,
    such as the geodesic pseudo-kernel.
    """

    values: np.ndarray
    spec: Optional[KernelSpec]
    fingerprint: str

    def __post_init__(self):
        v = numerics.as_matrix(self.values)
        if v.shape[0] != v.shape[1]:
            raise DimensionMismatch(
                f"a Gram matrix must be square, got {v.shape}")
        if np.max(np.abs(v - v.T)) > 0.0:
            raise ValueError("Gram matrix entries must be exactly symmetric")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    def take(self, indices):
        """Principal submatrix over the given point indices, order kept."""
        idx = np.asarray(indices, dtype=np.intp)
        if idx.ndim != 1 or idx.size == 0:
            raise DimensionMismatch("indices must form a nonempty vector")
        sub = self.values[np.ix_(idx, idx)]
        tag = hashlib.sha256(idx.tobytes()).hexdigest()[:12]
        return GramMatrix(sub, self.spec,
                          f"{self.fingerprint}:take:{tag}")


def gram(spec, data, fingerprint=None):
    """Assemble the full kernel matrix over a sequence of subspaces.

    Entry (i, j) is exactly evaluate(spec, data[i], data[j]); the matrix
    is filled on the upper triangle and mirrored, so symmetry is exact.
    """
    data = list(data)
    if not data:
        raise DimensionMismatch("need at least one subspace")
    shape = data[0].basis.shape
    for x in data:
        if x.basis.shape != shape:
            raise DimensionMismatch(
                "all subspaces must live on the same manifold")
    n = len(data)
    values = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            v = evaluate(spec, data[i], data[j])
            values[i, j] = v
            values[j, i] = v
    if fingerprint is None:
        fingerprint = subspace_fingerprint(data)
    return GramMatrix(values, spec, fingerprint)


@dataclass(frozen=True)
class CertificationReport:
    """Spectral verdict for a Gram matrix.

    For mode "cpd" the eigenvalues are those of J K J with
    J = I - ones/n, i.e. the kernel restricted to zero-sum weights.
    """

    mode: str
    min_eigenvalue: float
    max_eigenvalue: float
    tolerance: float
    passed: bool


def certify_pd(gram_matrix, mode="pd", tolerance=PD_TOLERANCE):
    """Check a Gram matrix for (conditional) positive definiteness.

    Passes when the smallest eigenvalue is no smaller than
    -tolerance * largest eigenvalue, which treats tiny negative
    eigenvalues commensurate with roundoff as zero.
    """
    if mode not in ("pd", "cpd"):
        raise ValueError(f"mode must be 'pd' or 'cpd', got {mode!r}")
    k = gram_matrix.values
    if mode == "cpd":
        n = k.shape[0]
        centering = np.eye(n) - np.full((n, n), 1.0 / n)
        k = centering @ k @ centering
    eigenvalues = numerics.symmetric_eigenvalues(k)
    lo = float(eigenvalues[0])
    hi = float(eigenvalues[-1])
    return CertificationReport(mode=mode, min_eigenvalue=lo,
                               max_eigenvalue=hi, tolerance=tolerance,
                               passed=bool(lo >= -tolerance * hi))


def geodesic_rbf_pseudo_kernel(x, y, beta=1.0):
    """exp(-beta * geodesic^2): a similarity that is NOT a kernel.

    Despite its Gaussian look this function fails to be positive
    definite on the manifold; see counterexample_gram for four subspaces
    whose matrix has a negative eigenvalue.  Provided for comparison
    studies, never for training.
    """
    if not beta > 0.0:
        raise InvalidKernelParameter(f"beta must be positive, got {beta}")
    return math.exp(-beta * grassmann.geodesic_distance(x, y) ** 2)


# Four bases on the manifold of 2-planes in R^3, printed to four decimal
# places.  Re-orthonormalized on use, they witness the indefiniteness of
# the geodesic Gaussian above.
COUNTEREXAMPLE_BASES = (
    ((1.0, 0.0),
     (0.0, 1.0),
     (0.0, 0.0)),
    ((-0.0996, -0.3085),
     (-0.4967, -0.8084),
     (-0.8622, 0.5014)),
    ((-0.9868, 0.1259),
     (-0.1221, -0.9916),
     (-0.1065, -0.0293)),
    ((0.1736, 0.0835),
     (0.7116, 0.6782),
     (0.6808, -0.7301)),
)


def counterexample_subspaces():
    """The four witness subspaces, re-orthonormalized from their printed form."""
    return [grassmann.Subspace(numerics.orthonormalize(np.array(b)))
            for b in COUNTEREXAMPLE_BASES]


def counterexample_gram(beta=1.0):
    """Gram matrix of the geodesic Gaussian on the four witness subspaces.

    With beta = 1 its smallest eigenvalue is about -0.0038, proving the
    geodesic Gaussian indefinite.
    """
    points = counterexample_subspaces()
    n = len(points)
    values = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            v = geodesic_rbf_pseudo_kernel(points[i], points[j], beta)
            values[i, j] = v
            values[j, i] = v
    return GramMatrix(values, None, subspace_fingerprint(points))
