"""External clustering evaluation: accuracy, macro F1, NMI, ARI.

All four scores are functions of the contingency table between the
predicted and ground-truth partitions, so they are invariant to relabeling
on either side. Accuracy and F1 use an exact optimal one-to-one matching of
clusters to classes (rectangular tables padded with zeros).
"""

import logging

import numpy as np
from scipy.optimize import linear_sum_assignment

log = logging.getLogger(__name__)


def _as_labels(x):
    x = np.asarray(getattr(x, "labels", x))
    _, inv = np.unique(x, return_inverse=True)
    return inv


def contingency_table(pred, truth):
    """k_pred x k_true table of co-occurrence counts."""
    pred = _as_labels(pred)
    truth = _as_labels(truth)
    if len(pred) != len(truth):
        raise ValueError(
            f"length mismatch: pred has {len(pred)}, truth has {len(truth)}"
        )
    kp, kt = pred.max() + 1, truth.max() + 1
    counts = np.bincount(pred * kt + truth, minlength=kp * kt)
    return counts.reshape(kp, kt)


def _optimal_assignment(table):
    kp, kt = table.shape
    size = max(kp, kt)
    padded = np.zeros((size, size), dtype=np.int64)
    padded[:kp, :kt] = table
    rows, cols = linear_sum_assignment(-padded)
    return rows, cols


def clustering_accuracy(pred, truth):
    """Best accuracy over one-to-one cluster-to-class assignments."""
    table = contingency_table(pred, truth)
    rows, cols = _optimal_assignment(table)
    size = max(table.shape)
    padded = np.zeros((size, size), dtype=np.int64)
    padded[: table.shape[0], : table.shape[1]] = table
    return float(padded[rows, cols].sum()) / table.sum()


def macro_f1(pred, truth):
    """Macro-averaged F1 over classes, after the optimal cluster matching."""
    pred = _as_labels(pred)
    truth = _as_labels(truth)
    table = contingency_table(pred, truth)
    rows, cols = _optimal_assignment(table)
    kt = table.shape[1]
    # relabel predicted clusters to their matched class; unmatched -> -1
    mapping = np.full(table.shape[0], -1, dtype=np.int64)
    for r, c in zip(rows, cols):
        if r < table.shape[0] and c < kt:
            mapping[r] = c
    matched = mapping[pred]
    scores = []
    for c in range(kt):
        tp = np.count_nonzero((matched == c) & (truth == c))
        fp = np.count_nonzero((matched == c) & (truth != c))
        fn = np.count_nonzero((matched != c) & (truth == c))
        denom = 2 * tp + fp + fn
        scores.append(2.0 * tp / denom if denom else 0.0)
    return float(np.mean(scores))


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(pred, truth):
    """Normalized mutual information with arithmetic-mean normalization."""
    table = contingency_table(pred, truth)
    n = table.sum()
    hp = _entropy(table.sum(axis=1), n)
    ht = _entropy(table.sum(axis=0), n)
    if hp == 0.0 and ht == 0.0:
        return 1.0
    if hp == 0.0 or ht == 0.0:
        return 0.0
    pi = table.sum(axis=1) / n
    pj = table.sum(axis=0) / n
    mi = 0.0
    for i in range(table.shape[0]):
        for j in range(table.shape[1]):
            if table[i, j]:
                pij = table[i, j] / n
                mi += pij * np.log(pij / (pi[i] * pj[j]))
    return float(mi / (0.5 * (hp + ht)))


def ari(pred, truth):
    """Adjusted Rand index under the permutation-model correction.

    A degenerate single-cluster ground truth carries no pair information;
    that case is logged and scored 0.
    """
    table = contingency_table(pred, truth)
    if table.shape[1] == 1:
        log.warning("ARI against a single-cluster ground truth; returning 0")
        return 0.0
    n = table.sum()
    comb = lambda x: x * (x - 1) / 2.0
    sum_ij = comb(table.astype(np.float64)).sum()
    sum_i = comb(table.sum(axis=1).astype(np.float64)).sum()
    sum_j = comb(table.sum(axis=0).astype(np.float64)).sum()
    total = comb(float(n))
    expected = sum_i * sum_j / total
    max_index = 0.5 * (sum_i + sum_j)
    if max_index == expected:
        return 1.0 if sum_ij == expected else 0.0
    return float((sum_ij - expected) / (max_index - expected))


def evaluate(pred, truth):
    """All four metrics as a dict."""
    return {
        "ca": clustering_accuracy(pred, truth),
        "cf1": macro_f1(pred, truth),
        "nmi": nmi(pred, truth),
        "ari": ari(pred, truth),
    }
