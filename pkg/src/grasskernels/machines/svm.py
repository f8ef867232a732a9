"""Binary soft-margin support vector machine on precomputed Gram matrices.

The dual is solved by two-variable decomposition with maximal-violating-pair
working set selection.  Each update direction changes alpha_i by +y_i * step
and alpha_j by -y_j * step, so the label-weighted coefficient sum stays zero
throughout.  Two consequences the tests lean on: the solver tolerates
conditionally positive definite Gram matrices (the curvature along every
update direction is K_ii + K_jj - 2 K_ij, which such matrices keep
nonnegative), and adding a constant to every Gram entry leaves the iterates
untouched.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .. import kernels
from ..exceptions import (ConvergenceFailure, DegenerateLabels,
                          DimensionMismatch)

KKT_TOLERANCE = 1e-6
MAX_ITERATIONS = 1_000_000

# curvature floor for degenerate working pairs
_TAU = 1e-12


@dataclass(frozen=True)
class SvmModel:
    """A trained classifier.

    `dual_coefficients[t]` is alpha * y for the support vector whose
    training index is `support_indices[t]`.  `training_refs` keeps the
    training subspaces (when they were provided) so queries can be scored
    without the caller resupplying them.
    """

    spec: Optional[kernels.KernelSpec]
    support_indices: np.ndarray
    dual_coefficients: np.ndarray
    bias: float
    kkt_residual: float
    iterations: int
    training_refs: Optional[Tuple] = None


def svm_train(gram_matrix, labels, c=1.0, refs=None,
              tolerance=KKT_TOLERANCE, max_iterations=MAX_ITERATIONS):
    """Train on a precomputed Gram matrix with labels in {-1, +1}.

    Runs until the maximal KKT violation drops to `tolerance`.  Raises
    ConvergenceFailure (carrying the remaining gap) if the iteration
    budget runs out first, and DegenerateLabels when only one class is
    present.
    """
    y = np.asarray(labels, dtype=np.float64)
    k = gram_matrix.values
    n = k.shape[0]
    if y.shape != (n,):
        raise DimensionMismatch(
            f"need {n} labels for a {n} x {n} Gram matrix, got {y.shape}")
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("labels must be -1 or +1")
    if np.all(y == y[0]):
        raise DegenerateLabels("training labels contain a single class")
    if not c > 0.0:
        raise ValueError(f"penalty c must be positive, got {c}")
    if refs is not None and len(refs) != n:
        raise DimensionMismatch(
            f"need {n} training refs, got {len(refs)}")

    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the dual objective at alpha = 0
    positive = y > 0.0

    residual = np.inf
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        score = -y * grad
        can_raise = np.where(positive, alpha < c, alpha > 0.0)
        can_lower = np.where(positive, alpha > 0.0, alpha < c)

        up = np.where(can_raise, score, -np.inf)
        i = int(np.argmax(up))
        down = np.where(can_lower, score, np.inf)
        j = int(np.argmin(down))
        residual = up[i] - down[j]
        if residual <= tolerance:
            break

        curvature = max(k[i, i] + k[j, j] - 2.0 * k[i, j], _TAU)
        step = residual / curvature
        # box limits for alpha_i + y_i * step and alpha_j - y_j * step
        limit_i = c - alpha[i] if positive[i] else alpha[i]
        limit_j = alpha[j] if positive[j] else c - alpha[j]
        step = min(step, limit_i, limit_j)

        old_i, old_j = alpha[i], alpha[j]
        if step == limit_i:
            alpha[i] = c if positive[i] else 0.0
        else:
            alpha[i] = old_i + y[i] * step
        if step == limit_j:
            alpha[j] = 0.0 if positive[j] else c
        else:
            alpha[j] = old_j - y[j] * step
        grad += y * (k[:, i] * (y[i] * (alpha[i] - old_i))
                     + k[:, j] * (y[j] * (alpha[j] - old_j)))
    else:
        raise ConvergenceFailure(
            f"no convergence after {max_iterations} iterations, "
            f"remaining KKT gap {residual:.3e}",
            iterations=max_iterations, gap=float(residual))

    score = -y * grad
    free = (alpha > 0.0) & (alpha < c)
    if np.any(free):
        bias = float(np.mean(score[free]))
    else:
        can_raise = np.where(positive, alpha < c, alpha > 0.0)
        can_lower = np.where(positive, alpha > 0.0, alpha < c)
        hi = np.max(np.where(can_raise, score, -np.inf))
        lo = np.min(np.where(can_lower, score, np.inf))
        bias = float((hi + lo) / 2.0)

    support = np.flatnonzero(alpha > 0.0)
    return SvmModel(
        spec=gram_matrix.spec,
        support_indices=support,
        dual_coefficients=alpha[support] * y[support],
        bias=bias,
        kkt_residual=float(max(residual, 0.0)),
        iterations=iterations,
        training_refs=tuple(refs) if refs is not None else None,
    )


def svm_decision_from_rows(model, rows):
    """Decision values from kernel rows against the full training set.

    `rows[q, t]` must hold the kernel between query q and training point
    t, in the training order used at fit time.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    return rows[:, model.support_indices] @ model.dual_coefficients \
        + model.bias


def svm_decision(model, query):
    """Decision value for one subspace, using the retained training refs."""
    if model.training_refs is None:
        raise ValueError("model was trained without refs; "
                         "use svm_decision_from_rows")
    if model.spec is None:
        raise ValueError("model has no kernel spec to evaluate with")
    row = np.array([kernels.evaluate(model.spec, query,
                                     model.training_refs[t])
                    for t in model.support_indices])
    return float(row @ model.dual_coefficients + model.bias)


def svm_predict(model, query):
    """Predicted label in {-1, +1}; the decision boundary maps to +1."""
    return 1 if svm_decision(model, query) >= 0.0 else -1
