"""Kernelized sparse coding by cyclic coordinate descent.

A query with kernel self-similarity q and kernel column vector k against
a dictionary with Gram matrix K is coded by minimizing

    f(y) = y.T K y - 2 y.T k + q + lam * ||y||_1

which is the feature-space lasso residual.  Each coordinate has the
closed-form soft-threshold minimizer, so a full sweep never increases
the objective.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..exceptions import (DimensionMismatch, NotPositiveSemidefinite,
                          ZeroCode)
from ..kernels import certify_pd

MAX_SWEEPS = 10_000
COEFFICIENT_TOLERANCE = 1e-8


@dataclass(frozen=True)
class SparseCode:
    """A fitted code and its optimization trace.

    `objective_history` records f(y) after every sweep and never
    increases; `objective` is its last entry.
    """

    coefficients: np.ndarray
    lam: float
    objective: float
    objective_history: Tuple[float, ...]
    sweeps: int


def _soft_threshold(value, amount):
    if value > amount:
        return value - amount
    if value < -amount:
        return value + amount
    return 0.0


def kernel_sparse_code(dict_gram, query_column, query_self, lam,
                       max_sweeps=MAX_SWEEPS,
                       tolerance=COEFFICIENT_TOLERANCE,
                       check_psd=True):
    """Code one query against a dictionary held as a Gram matrix.

    `query_column[t]` is the kernel between the query and dictionary
    atom t, and `query_self` the kernel of the query with itself.
    Sweeps stop when no coefficient moves by more than `tolerance`.
    Dictionaries whose Gram matrix is not positive semidefinite are
    rejected; callers that certify once and code many queries can pass
    check_psd=False to skip the repeated eigenvalue check.
    """
    kmat = dict_gram.values
    n = kmat.shape[0]
    k = np.asarray(query_column, dtype=np.float64).ravel()
    if k.shape != (n,):
        raise DimensionMismatch(
            f"query column must have {n} entries, got {k.shape}")
    if not lam > 0.0:
        raise ValueError(f"penalty lam must be positive, got {lam}")
    if check_psd and not certify_pd(dict_gram, mode="pd").passed:
        raise NotPositiveSemidefinite(
            "dictionary Gram matrix has a negative eigenvalue beyond "
            "roundoff; the coding objective would be unbounded")

    q = float(query_self)
    y = np.zeros(n)
    ky = np.zeros(n)  # K @ y, maintained incrementally
    history = []
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        largest_move = 0.0
        for j in range(n):
            kjj = kmat[j, j]
            if kjj <= 0.0:
                continue  # zero atom: its coefficient stays put
            residual = k[j] - (ky[j] - kjj * y[j])
            updated = _soft_threshold(residual, lam / 2.0) / kjj
            move = updated - y[j]
            if move != 0.0:
                ky += kmat[:, j] * move
                y[j] = updated
                largest_move = max(largest_move, abs(move))
        # evaluate the true objective fresh to keep the trace honest
        history.append(float(y @ (kmat @ y) - 2.0 * (y @ k) + q
                             + lam * np.sum(np.abs(y))))
        if largest_move < tolerance:
            break
    return SparseCode(
        coefficients=y,
        lam=float(lam),
        objective=history[-1],
        objective_history=tuple(history),
        sweeps=sweeps,
    )


def sparse_code_classify(code, atom_labels):
    """Label of the atom with the largest absolute coefficient.

    Ties go to the lowest atom index.  Raises ZeroCode when every
    coefficient is zero, which signals that the penalty was too large
    for the query.
    """
    labels = np.asarray(atom_labels)
    weight = np.abs(code.coefficients)
    if labels.shape != weight.shape:
        raise DimensionMismatch(
            f"need {weight.size} atom labels, got {labels.shape}")
    if not np.any(weight > 0.0):
        raise ZeroCode("all coefficients are zero; no atom to attribute")
    return labels[int(np.argmax(weight))]
