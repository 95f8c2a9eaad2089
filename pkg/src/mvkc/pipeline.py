"""End-to-end clustering pipeline.

Per view: smooth features, center, take the f leading left singular vectors,
map them through the kernel feature map, degree-normalize the factor, embed
and cluster. Then weight the views by clusterability, concatenate the scaled
factors, and run the same normalize/embed/cluster pass once more for the
consensus partition. Never allocates an n x n matrix.
"""

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .data import MultiViewDataset
from .embedding import FactorMatrix, degree_normalize, implicit_degrees, spectral_embedding
from .kernels import KERNEL_KINDS, apply_map, fit_kernel_map
from .kmeans import Partition, kmeans
from .linalg import center_columns, truncated_svd
from .propagation import propagate_cached
from .weighting import WEIGHT_MODES, ViewWeights, clusterability_trace, softmax_weights

CONCAT_SCALES = ("sqrt_lambda", "lambda")


@dataclass
class PipelineConfig:
    """All tunables of a clustering run."""

    k: int
    f: int | None = None  # components per view; defaults to k
    temperature: float = 0.1
    kernel: str = "quadratic_exact"
    kernel_components: int | None = None  # Nystroem landmarks; defaults to 10k
    kernel_params: dict = field(default_factory=dict)
    svd_oversample: int = 10
    svd_power_iters: int = 4
    kmeans_max_iter: int = 300
    kmeans_tol: float = 1e-6
    weight_mode: str = "softmax"
    concat_scale: str = "sqrt_lambda"
    normalization: str = "sym_selfloop"
    propagation_orders: list | None = None  # per-view override
    shared_graph_view: int | None = None
    seed: int = 0
    cache_dir: str | None = None

    def __post_init__(self):
        if self.f is None:
            self.f = self.k
        if self.kernel_components is None:
            self.kernel_components = 10 * self.k
        if self.k < 2:
            raise ValueError(f"need k >= 2 clusters, got {self.k}")
        if self.f < 1:
            raise ValueError(f"need f >= 1 components, got {self.f}")
        if self.kernel not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel: {self.kernel}")
        if self.weight_mode not in WEIGHT_MODES:
            raise ValueError(f"unknown weight mode: {self.weight_mode}")
        if self.concat_scale not in CONCAT_SCALES:
            raise ValueError(f"unknown concat scale: {self.concat_scale}")

    def to_dict(self):
        return dataclasses.asdict(self)

    def hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class ClusteringResult:
    consensus: Partition
    per_view: list
    weights: ViewWeights
    timings: dict
    config: PipelineConfig


class _StageTimer:
    def __init__(self):
        self.totals = {}

    def add(self, stage, start):
        self.totals[stage] = self.totals.get(stage, 0.0) + (time.perf_counter() - start)


def _derived_seeds(seed, n_views):
    """Independent child seeds for every stochastic stage."""
    children = np.random.SeedSequence(seed).spawn(n_views + 1)
    return [int(c.generate_state(1)[0]) for c in children]


def _shared_graph(dataset, config):
    if config.shared_graph_view is not None:
        return dataset.views[config.shared_graph_view].graph
    for view in dataset.views:
        if view.graph is not None:
            return view.graph
    return None


def run_pipeline(dataset: MultiViewDataset, config: PipelineConfig) -> ClusteringResult:
    """Run the full multi-view clustering pass and return all partitions."""
    n_views = dataset.n_views
    seeds = _derived_seeds(config.seed, n_views)
    timer = _StageTimer()
    shared_graph = _shared_graph(dataset, config)

    factors = []
    partitions = []
    traces = []
    for v, view in enumerate(dataset.views):
        try:
            p = view.propagation_order
            if config.propagation_orders is not None:
                p = config.propagation_orders[v]
            graph = view.graph if view.graph is not None else shared_graph
            t0 = time.perf_counter()
            if p > 0:
                if graph is None:
                    raise ValueError("propagation requested but no graph available")
                X = propagate_cached(graph, view.features, p,
                                     normalization=config.normalization,
                                     cache_dir=config.cache_dir)
            else:
                X = view.features
            timer.add("propagation", t0)

            t0 = time.perf_counter()
            Xc = center_columns(X)
            svd = truncated_svd(Xc, config.f, oversample=config.svd_oversample,
                                power_iters=config.svd_power_iters, seed=seeds[v])
            timer.add("svd", t0)

            t0 = time.perf_counter()
            kmap = fit_kernel_map(config.kernel, svd.U,
                                  m=min(config.kernel_components, dataset.n),
                                  params=config.kernel_params, seed=seeds[v])
            B = FactorMatrix(apply_map(kmap, svd.U))
            timer.add("kernel_map", t0)

            t0 = time.perf_counter()
            B = degree_normalize(B, implicit_degrees(B))
            embedding = spectral_embedding(B, config.f,
                                           oversample=config.svd_oversample,
                                           power_iters=config.svd_power_iters,
                                           seed=seeds[v])
            timer.add("embedding", t0)

            t0 = time.perf_counter()
            G, _ = kmeans(embedding.coords, config.k, seed=seeds[v],
                          max_iter=config.kmeans_max_iter, tol=config.kmeans_tol)
            timer.add("kmeans", t0)

            t0 = time.perf_counter()
            traces.append(clusterability_trace(B, G))
            timer.add("weighting", t0)
            factors.append(B)
            partitions.append(G)
        except Exception as exc:
            raise RuntimeError(f"view {v} failed: {exc}") from exc

    t0 = time.perf_counter()
    weights = softmax_weights(np.array(traces), config.temperature, mode=config.weight_mode)
    if config.concat_scale == "sqrt_lambda":
        scales = np.sqrt(weights.lambdas)
    else:
        scales = weights.lambdas
    concat = np.hstack([s * B.values for s, B in zip(scales, factors)])
    timer.add("weighting", t0)

    t0 = time.perf_counter()
    B = FactorMatrix(concat)
    B = degree_normalize(B, implicit_degrees(B))
    embedding = spectral_embedding(B, config.f,
                                   oversample=config.svd_oversample,
                                   power_iters=config.svd_power_iters,
                                   seed=seeds[n_views])
    consensus, _ = kmeans(embedding.coords, config.k, seed=seeds[n_views],
                          max_iter=config.kmeans_max_iter, tol=config.kmeans_tol)
    timer.add("consensus", t0)

    return ClusteringResult(consensus, partitions, weights, timer.totals, config)


def consensus_affinity_oracle(factor_values, lambdas, max_n=2048):
    """Materialized weighted consensus affinity, for tests and small data.

    Returns sum_v lambda_v B_v @ B_v.T; the pipeline's concatenated factor
    must have exactly this Gram matrix.
    """
    n = factor_values[0].shape[0]
    if n > max_n:
        raise ValueError(f"oracle limited to n <= {max_n}, got {n}")
    out = np.zeros((n, n))
    for lam, B in zip(lambdas, factor_values):
        out += lam * (B @ B.T)
    return out
