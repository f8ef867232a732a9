"""Label-agreement metrics for clustering results."""

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..exceptions import DimensionMismatch


def _contingency(predicted, truth):
    a = np.asarray(predicted).ravel()
    b = np.asarray(truth).ravel()
    if a.size != b.size or a.size == 0:
        raise DimensionMismatch(
            f"label vectors must have equal nonzero length, "
            f"got {a.size} and {b.size}")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def normalized_mutual_information(predicted, truth):
    """Mutual information normalized by the geometric mean of entropies.

    Uses natural logarithms.  When either labeling has zero entropy the
    normalization is undefined and the result is 0 by convention.
    """
    table = _contingency(predicted, truth)
    n = table.sum()
    joint = table / n
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    nz = joint > 0
    outer = np.outer(pa, pb)
    info = float(np.sum(joint[nz] * np.log(joint[nz] / outer[nz])))
    ha = float(-np.sum(pa[pa > 0] * np.log(pa[pa > 0])))
    hb = float(-np.sum(pb[pb > 0] * np.log(pb[pb > 0])))
    if ha == 0.0 or hb == 0.0:
        return 0.0
    return float(min(max(info / np.sqrt(ha * hb), 0.0), 1.0))


def clustering_accuracy(predicted, truth):
    """Fraction of points correct under the best cluster-to-class matching.

    The matching is the assignment maximizing the total contingency mass,
    found by the Hungarian algorithm, so permuting cluster ids never
    changes the score.
    """
    table = _contingency(predicted, truth)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum() / table.sum())
