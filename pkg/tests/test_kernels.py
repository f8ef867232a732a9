"""Kernel catalog, Gram assembly, and spectral certification tests.

Closed-form expectations come from elementary trigonometry on pairs with
known principal angles, and from exact circulant eigenvalues for four
equally spaced lines in the plane.
"""

import hashlib
import math

import numpy as np
import pytest

from grasskernels import grassmann
from grasskernels.exceptions import DimensionMismatch, InvalidKernelParameter
from grasskernels.grassmann import Subspace, subspace_pair_with_angles
from grasskernels.kernels import (GramMatrix, KernelSpec, certify_pd,
                                  counterexample_gram, evaluate,
                                  geodesic_rbf_pseudo_kernel, gram,
                                  parse_kernel_token, spec_from_kv,
                                  subspace_fingerprint)

CATALOG = (
    "baseline:bc", "linear:bc", "polynomial:bc:alpha=2:beta=0.5",
    "rbf:bc:beta=1.0", "laplace:bc:beta=1.0",
    "binomial:bc:alpha=1.0:beta=2.0", "logarithm:bc",
    "baseline:projection", "linear:projection",
    "polynomial:projection:alpha=2:beta=0.5", "rbf:projection:beta=0.5",
    "laplace:projection:beta=0.5",
    "binomial:projection:alpha=1.0:beta=3.0", "logarithm:projection",
)


def line(t):
    return Subspace([[math.cos(t)], [math.sin(t)]])


def four_lines():
    # equally spaced lines in the plane; |cos| gram is circulant
    return [line(k * math.pi / 4.0) for k in range(4)]


def random_points(n, d, p, key):
    rng = np.random.default_rng(key)
    return [grassmann.random_subspace(d, p, rng) for _ in range(n)]


# ---------------------------------------------------------------- spec


def test_embedding_aliases():
    assert KernelSpec("bc", "linear", 2).embedding == "binet_cauchy"
    assert KernelSpec("binet-cauchy", "linear", 2).embedding == "binet_cauchy"
    assert KernelSpec("proj", "linear", 2).embedding == "projection"
    assert KernelSpec("projection", "linear", 2).embedding == "projection"


def test_unknown_names_rejected():
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("chordal", "linear", 2)
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("bc", "sigmoid", 2)


def test_p_must_be_positive_integer():
    for bad in (0, -2, 2.5, "2"):
        with pytest.raises(InvalidKernelParameter):
            KernelSpec("bc", "linear", bad)


def test_parameter_presence():
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("bc", "rbf", 2)  # needs beta
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("bc", "polynomial", 2, beta=1.0)  # needs alpha too
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("bc", "rbf", 2, alpha=1.0, beta=1.0)  # no alpha slot
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("bc", "linear", 2, beta=1.0)
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("proj", "baseline", 2, alpha=2.0)


def test_parameter_ranges():
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("bc", "polynomial", 2, alpha=2.0, beta=0.0)
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("bc", "polynomial", 2, alpha=1.5, beta=1.0)
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("bc", "polynomial", 2, alpha=0.0, beta=1.0)
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("bc", "rbf", 2, beta=0.0)
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("proj", "laplace", 2, beta=-0.5)
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("bc", "binomial", 2, alpha=0.0, beta=2.0)
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("bc", "rbf", 2, beta=math.inf)
    # integer-valued float exponents are fine
    assert KernelSpec("bc", "polynomial", 2, alpha=3.0, beta=0.5).alpha == 3.0


def test_binomial_scale_floor_tracks_embedding():
    # determinant similarity tops out at 1, projection at p
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("bc", "binomial", 2, alpha=1.0, beta=1.0)
    assert KernelSpec("bc", "binomial", 2, alpha=1.0, beta=1.5).beta == 1.5
    with pytest.raises(InvalidKernelParameter):
        KernelSpec("proj", "binomial", 2, alpha=1.0, beta=2.0)
    assert KernelSpec("proj", "binomial", 2, alpha=1.0, beta=2.5).beta == 2.5


def test_similarity_max_and_mode():
    assert KernelSpec("bc", "linear", 3).similarity_max == 1.0
    assert KernelSpec("proj", "linear", 3).similarity_max == 3.0
    assert KernelSpec("bc", "logarithm", 2).certification_mode == "cpd"
    assert KernelSpec("proj", "rbf", 2, beta=1.0).certification_mode == "pd"


def test_label_round_trip():
    for token in CATALOG:
        spec = parse_kernel_token(token, 2)
        assert parse_kernel_token(spec.label(), 2) == spec
    assert KernelSpec("proj", "rbf", 2, beta=0.5).label() == \
        "rbf:projection:beta=0.5"
    assert KernelSpec("bc", "linear", 2).label() == "linear:bc"
    assert KernelSpec("bc", "polynomial", 2, alpha=2, beta=0.5).label() == \
        "polynomial:bc:alpha=2.0:beta=0.5"


def test_parse_token_errors():
    for bad in ("linear", "rbf:bc:beta", "rbf:bc:beta=abc", "rbf:bc:gamma=1"):
        with pytest.raises(InvalidKernelParameter):
            parse_kernel_token(bad, 2)


def test_kv_round_trip():
    for token in CATALOG:
        spec = parse_kernel_token(token, 2)
        assert spec_from_kv(spec.to_kv(), 2) == spec
    spec = KernelSpec("proj", "rbf", 2, beta=0.5)
    assert spec.to_kv() == "embedding=projection\nfamily=rbf\nalpha=\nbeta=0.5"
    with pytest.raises(InvalidKernelParameter):
        spec_from_kv("embedding=projection\nalpha=\nbeta=0.5", 2)
    with pytest.raises(InvalidKernelParameter):
        spec_from_kv("no equals sign here", 2)


# ---------------------------------------------------------- evaluation


def test_planar_closed_forms():
    """Every family, checked against trigonometry on a pair of lines."""
    t = 0.7
    x, y = line(0.0), line(t)
    sb = math.cos(t)       # determinant similarity
    sp = math.cos(t) ** 2  # projection similarity
    cases = (
        ("baseline:bc", sb * sb),
        ("baseline:projection", sp),
        ("linear:bc", sb),
        ("linear:projection", sp),
        ("polynomial:bc:alpha=2:beta=0.5", (0.5 + sb) ** 2),
        ("polynomial:projection:alpha=3:beta=0.25", (0.25 + sp) ** 3),
        ("rbf:bc:beta=1.3", math.exp(1.3 * sb)),
        ("rbf:projection:beta=1.3", math.exp(1.3 * sp)),
        ("laplace:bc:beta=0.9", math.exp(-0.9 * math.sqrt(1.0 - sb))),
        ("laplace:projection:beta=0.9", math.exp(-0.9 * abs(math.sin(t)))),
        ("binomial:bc:alpha=1.5:beta=2", (2.0 - sb) ** -1.5),
        ("binomial:projection:alpha=1.5:beta=2", (2.0 - sp) ** -1.5),
        ("logarithm:bc", -math.log(2.0 - sb)),
        ("logarithm:projection", -math.log(2.0 - sp)),
    )
    for token, expected in cases:
        spec = parse_kernel_token(token, 1)
        np.testing.assert_allclose(evaluate(spec, x, y), expected,
                                   rtol=1e-13, err_msg=token)


def test_two_angle_closed_forms():
    rng = np.random.default_rng(11)
    t1, t2 = 0.4, 1.1
    x, y = subspace_pair_with_angles(4, 2, [t1, t2], rng)
    sb = math.cos(t1) * math.cos(t2)
    sp = math.cos(t1) ** 2 + math.cos(t2) ** 2
    checks = (
        ("rbf:bc:beta=2.0", math.exp(2.0 * sb)),
        ("laplace:projection:beta=0.7",
         math.exp(-0.7 * math.sqrt(2.0 - sp))),
        ("logarithm:bc", -math.log(2.0 - sb)),
        ("logarithm:projection", -math.log(3.0 - sp)),
    )
    for token, expected in checks:
        spec = parse_kernel_token(token, 2)
        np.testing.assert_allclose(evaluate(spec, x, y), expected,
                                   rtol=0, atol=1e-9, err_msg=token)


def test_evaluate_dimension_guards():
    spec = parse_kernel_token("linear:bc", 1)
    a = line(0.3)
    b = Subspace(np.eye(3)[:, :1])
    with pytest.raises(DimensionMismatch):
        evaluate(spec, a, b)
    wide = parse_kernel_token("linear:bc", 2)
    with pytest.raises(DimensionMismatch):
        evaluate(wide, a, line(0.5))


def test_basis_invariance_across_catalog():
    """Kernel values must not depend on which basis represents a subspace."""
    rng = np.random.default_rng(42)
    pairs = [(grassmann.random_subspace(6, 2, rng),
              grassmann.random_subspace(6, 2, rng)) for _ in range(5)]
    for token in CATALOG:
        spec = parse_kernel_token(token, 2)
        for x, y in pairs:
            q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
            y2 = Subspace(y.basis @ q)
            np.testing.assert_allclose(evaluate(spec, x, y2),
                                       evaluate(spec, x, y),
                                       rtol=0, atol=1e-10, err_msg=token)


def test_baseline_matches_squared_linear():
    """The determinant baseline is exactly the squared linear value."""
    pts = random_points(10, 6, 2, 5)
    gb = gram(parse_kernel_token("baseline:bc", 2), pts)
    gl = gram(parse_kernel_token("linear:bc", 2), pts)
    assert np.array_equal(gb.values, np.square(gl.values))
    gbp = gram(parse_kernel_token("baseline:projection", 2), pts)
    glp = gram(parse_kernel_token("linear:projection", 2), pts)
    assert np.array_equal(gbp.values, glp.values)


# ---------------------------------------------------------------- gram


def test_gram_symmetry_and_diagonal():
    pts = random_points(8, 5, 2, 7)
    g = gram(parse_kernel_token("rbf:projection:beta=0.5", 2), pts)
    assert np.array_equal(g.values, g.values.T)
    np.testing.assert_allclose(np.diag(g.values), math.exp(1.0), rtol=1e-12)
    g2 = gram(parse_kernel_token("linear:bc", 2), pts)
    np.testing.assert_allclose(np.diag(g2.values), 1.0, rtol=1e-12)
    assert g.n == 8


def test_gram_input_guards():
    spec = parse_kernel_token("linear:bc", 2)
    with pytest.raises(DimensionMismatch):
        gram(spec, [])
    mixed = [grassmann.random_subspace(5, 2, np.random.default_rng(0)),
             grassmann.random_subspace(6, 2, np.random.default_rng(1))]
    with pytest.raises(DimensionMismatch):
        gram(spec, mixed)


def test_take_submatrix_contract():
    pts = random_points(6, 5, 2, 9)
    spec = parse_kernel_token("rbf:projection:beta=0.5", 2)
    full = gram(spec, pts)
    idx = np.array([0, 2, 5])
    sub = full.take(idx)
    assert np.array_equal(sub.values, full.values[np.ix_(idx, idx)])
    # bitwise identical to assembling the subset from scratch
    direct = gram(spec, [pts[i] for i in idx])
    assert np.array_equal(sub.values, direct.values)
    tag = hashlib.sha256(idx.astype(np.intp).tobytes()).hexdigest()[:12]
    assert sub.fingerprint == f"{full.fingerprint}:take:{tag}"
    with pytest.raises(DimensionMismatch):
        full.take(np.array([], dtype=np.intp))
    with pytest.raises(DimensionMismatch):
        full.take(np.array([[0, 1]]))


def test_gram_matrix_guards():
    with pytest.raises(ValueError):
        GramMatrix(np.array([[1.0, 0.1], [0.2, 1.0]]), None, "x")
    with pytest.raises(DimensionMismatch):
        GramMatrix(np.zeros((2, 3)), None, "x")
    g = GramMatrix(np.eye(2), None, "x")
    with pytest.raises(ValueError):
        g.values[0, 0] = 2.0  # stored entries are frozen


def test_subspace_fingerprint_is_order_sensitive():
    pts = random_points(3, 4, 2, 13)
    fp = subspace_fingerprint(pts)
    assert len(fp) == 64 and set(fp) <= set("0123456789abcdef")
    assert fp == subspace_fingerprint(pts)
    assert fp != subspace_fingerprint(pts[::-1])


# -------------------------------------------------------- certification


def test_certify_pd_fixtures():
    ident = GramMatrix(np.eye(3), None, "id")
    rep = certify_pd(ident)
    assert rep.passed and rep.mode == "pd"
    np.testing.assert_allclose([rep.min_eigenvalue, rep.max_eigenvalue],
                               [1.0, 1.0], rtol=1e-12)
    flipped = certify_pd(GramMatrix(np.diag([1.0, -1.0]), None, "flip"))
    assert not flipped.passed
    with pytest.raises(ValueError):
        certify_pd(ident, mode="positive")


def test_certify_cpd_accepts_negative_squared_distances():
    # -(squared distances of points 0, 1, 2 on a line): conditionally pd
    # on zero-sum weights but indefinite as a plain matrix
    m = -np.array([[0.0, 1.0, 4.0], [1.0, 0.0, 1.0], [4.0, 1.0, 0.0]])
    g = GramMatrix(m, None, "neg-sqdist")
    assert certify_pd(g, mode="cpd").passed
    assert not certify_pd(g, mode="pd").passed


def test_four_lines_spectrum():
    """Exact circulant eigenvalues for |cos| on four equally spaced lines.

    The absolute-cosine matrix has first row (1, c, 0, c) with
    c = sqrt(2)/2, hence eigenvalues 1 + 2c, 1, 1, 1 - 2c; the smallest
    is 1 - sqrt(2) < 0, so the determinant-similarity linear kernel is
    not positive definite.  Exponentiating does not repair it at scale 1:
    the alternating eigenvalue of exp(|cos|) is e - 2 exp(c) + 1 < 0.
    """
    pts = four_lines()
    g = gram(parse_kernel_token("linear:bc", 1), pts)
    lo = float(np.linalg.eigvalsh(g.values)[0])
    np.testing.assert_allclose(lo, 1.0 - math.sqrt(2.0), rtol=0, atol=1e-12)
    assert not certify_pd(g).passed
    g2 = gram(parse_kernel_token("rbf:bc:beta=1.0", 1), pts)
    lo2 = float(np.linalg.eigvalsh(g2.values)[0])
    expected = math.e - 2.0 * math.exp(math.sqrt(2.0) / 2.0) + 1.0
    np.testing.assert_allclose(lo2, expected, rtol=0, atol=1e-12)
    assert not certify_pd(g2).passed


def test_certification_regression_on_sampled_subspaces():
    """Certification verdicts on a fixed 60-point sample.

    Projection-side kernels certify in their natural mode; on the
    determinant side the linear kernel is indefinite and the logarithm
    fails even conditionally, while the laplace and squared-baseline
    forms survive this sample.
    """
    pts = [grassmann.random_subspace(8, 2, np.random.default_rng([3, i]))
           for i in range(60)]
    grams = {}

    def verdict(token):
        spec = parse_kernel_token(token, 2)
        grams[token] = gram(spec, pts)
        return certify_pd(grams[token], mode=spec.certification_mode)

    assert not verdict("linear:bc").passed
    assert not verdict("logarithm:bc").passed
    assert verdict("laplace:bc:beta=1.0").passed
    assert verdict("baseline:bc").passed
    for token in ("baseline:projection", "linear:projection",
                  "polynomial:projection:alpha=2:beta=0.5",
                  "rbf:projection:beta=0.5", "laplace:projection:beta=0.5",
                  "binomial:projection:alpha=1.0:beta=3.0",
                  "logarithm:projection"):
        assert verdict(token).passed, token
    # the indefinite sample is far outside roundoff
    rep = certify_pd(grams["linear:bc"])
    assert rep.min_eigenvalue < -1e-3 * rep.max_eigenvalue


def test_geodesic_pseudo_kernel():
    x, y = line(0.0), line(0.6)
    assert geodesic_rbf_pseudo_kernel(x, x) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(geodesic_rbf_pseudo_kernel(x, y),
                               geodesic_rbf_pseudo_kernel(y, x), rtol=1e-12)
    np.testing.assert_allclose(geodesic_rbf_pseudo_kernel(x, y),
                               math.exp(-0.36), rtol=1e-10)
    for bad in (0.0, -1.0):
        with pytest.raises(InvalidKernelParameter):
            geodesic_rbf_pseudo_kernel(x, y, beta=bad)


def test_counterexample_gram():
    """Four subspaces witness the geodesic Gaussian's indefiniteness."""
    g = counterexample_gram()
    assert g.spec is None and g.n == 4
    rep = certify_pd(g)
    assert not rep.passed
    assert -0.0043 < rep.min_eigenvalue < -0.0033
    assert rep.max_eigenvalue > 0.0
    np.testing.assert_allclose(rep.min_eigenvalue, -0.0038326472116467537,
                               rtol=0, atol=1e-9)
    np.testing.assert_allclose(np.diag(g.values), 1.0, rtol=1e-12)
