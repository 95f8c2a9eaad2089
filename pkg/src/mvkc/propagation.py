"""Feature smoothing by powers of a normalized adjacency operator.

Each view's features are pre-multiplied p times by a normalized adjacency.
The default operator adds self-loops and normalizes symmetrically,
D^{-1/2} (A + I) D^{-1/2} with D the degree of A + I, whose spectral radius
is at most 1, so high propagation orders stay bounded.
"""

import hashlib
import os

import numpy as np
import scipy.sparse as sp

from .data import load_features, save_features

NORMALIZATIONS = ("sym_selfloop", "sym", "row")


class NormalizedAdjacency:
    """Sparse propagation operator derived from a graph."""

    def __init__(self, graph, normalization="sym_selfloop"):
        if normalization not in NORMALIZATIONS:
            raise ValueError(f"unknown normalization: {normalization}")
        self.n = graph.n
        self.normalization = normalization
        adj = graph.to_csr()
        if normalization == "sym_selfloop":
            adj = adj + sp.identity(self.n, format="csr")
        degrees = np.asarray(adj.sum(axis=1)).ravel()
        self.degrees = degrees
        with np.errstate(divide="ignore"):
            if normalization == "row":
                inv = np.where(degrees > 0, 1.0 / degrees, 0.0)
                self.op = sp.diags(inv) @ adj
            else:
                inv_sqrt = np.where(degrees > 0, degrees, 1.0) ** -0.5
                inv_sqrt[degrees <= 0] = 0.0
                self.op = sp.diags(inv_sqrt) @ adj @ sp.diags(inv_sqrt)
        self.op = self.op.tocsr()


def propagate(adj, features, p):
    """Apply the normalized adjacency p times to the feature matrix."""
    if adj.n != features.shape[0]:
        raise ValueError(
            f"adjacency has n={adj.n} but features have {features.shape[0]} rows"
        )
    if p < 0:
        raise ValueError(f"propagation order must be >= 0, got {p}")
    out = np.asarray(features, dtype=np.float64)
    for _ in range(p):
        out = adj.op @ out
    if not np.isfinite(out).all():
        raise FloatingPointError("propagation produced non-finite values")
    return out


def _cache_key(graph, features, p, normalization):
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(graph.rows).tobytes())
    h.update(np.ascontiguousarray(graph.cols).tobytes())
    h.update(np.ascontiguousarray(graph.weights).tobytes())
    h.update(np.ascontiguousarray(features, dtype="<f8").tobytes())
    h.update(f"p={p};norm={normalization}".encode())
    return h.hexdigest()[:32]


def propagate_cached(graph, features, p, normalization="sym_selfloop", cache_dir=None):
    """Propagate, reusing an on-disk result keyed by a content hash."""
    if p == 0:
        return np.asarray(features, dtype=np.float64)
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        path = os.path.join(cache_dir, _cache_key(graph, features, p, normalization) + ".bin")
        if os.path.isfile(path):
            return load_features(path)
    out = propagate(NormalizedAdjacency(graph, normalization), features, p)
    if cache_dir is not None:
        save_features(out, path)
    return out
