"""Seeded Lloyd k-means with k-means++ initialization.

Deterministic given (data, k, seed). Empty clusters are repaired by moving
the point currently farthest from its centroid into the empty cluster, so
every cluster in the returned partition is nonempty.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class Partition:
    """Hard assignment of n points to k clusters."""

    labels: np.ndarray
    k: int

    @property
    def n(self):
        return len(self.labels)

    def indicator(self):
        """Binary n x k membership matrix with exactly one 1 per row."""
        F = np.zeros((self.n, self.k))
        F[np.arange(self.n), self.labels] = 1.0
        return F


def _plusplus_init(X, k, rng):
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[rng.integers(n)]
    d2 = np.einsum("ij,ij->i", X - centroids[0], X - centroids[0])
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=d2 / total)
        centroids[c] = X[idx]
        cand = np.einsum("ij,ij->i", X - centroids[c], X - centroids[c])
        np.minimum(d2, cand, out=d2)
    return centroids


def _repair_empty(labels, dists, k):
    """Move the worst-fitting point from a multi-member cluster into each
    empty cluster. Returns True if anything changed."""
    counts = np.bincount(labels, minlength=k)
    changed = False
    for c in range(k):
        while counts[c] == 0:
            candidates = np.flatnonzero(counts[labels] > 1)
            idx = candidates[int(np.argmax(dists[candidates]))]
            counts[labels[idx]] -= 1
            labels[idx] = c
            counts[c] += 1
            dists[idx] = -1.0
            changed = True
    return changed


def _assign(X, centroids):
    c2 = np.einsum("ij,ij->i", centroids, centroids)
    d2 = c2[None, :] - 2.0 * X @ centroids.T
    labels = np.argmin(d2, axis=1)
    x2 = np.einsum("ij,ij->i", X, X)
    dists = np.maximum(d2[np.arange(len(labels)), labels] + x2, 0.0)
    return labels, dists


def kmeans(X, k, seed=0, max_iter=300, tol=1e-6):
    """Lloyd iterations from a k-means++ start.

    Returns (Partition, inertia). Stops when the relative centroid movement
    drops below ``tol`` or after ``max_iter`` iterations.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not (1 <= k <= n):
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    centroids = _plusplus_init(X, k, rng)
    labels = np.full(n, -1)
    prev_inertia = np.inf
    repaired = False
    for _ in range(max_iter):
        labels, dists = _assign(X, centroids)
        inertia = dists.sum()
        # Lloyd inertia is nonincreasing except right after a repair
        assert repaired or inertia <= prev_inertia * (1.0 + 1e-12) + 1e-12
        prev_inertia = inertia
        repaired = _repair_empty(labels, dists, k)
        new_centroids = np.zeros_like(centroids)
        np.add.at(new_centroids, labels, X)
        counts = np.bincount(labels, minlength=k).astype(np.float64)
        empty = counts == 0
        new_centroids[~empty] /= counts[~empty, None]
        new_centroids[empty] = centroids[empty]
        shift = np.linalg.norm(new_centroids - centroids)
        scale = np.linalg.norm(centroids)
        centroids = new_centroids
        if shift <= tol * max(scale, 1.0):
            break
    labels, dists = _assign(X, centroids)
    repaired = _repair_empty(labels, dists, k)
    if repaired:
        diff = X - centroids[labels]
        dists = np.einsum("ij,ij->i", diff, diff)
    inertia = float(dists.sum())
    return Partition(labels.astype(np.int64), k), inertia
