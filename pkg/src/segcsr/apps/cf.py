"""Collaborative filtering as full-gradient matrix factorization.

The ratings graph is bipartite and must carry edges in both directions with
the rating as the edge weight. Per iteration, every vertex v gathers

    grad[v] = sum over rated neighbors u of (p_u . p_v - r_uv) * p_u

via a vector-valued edge fold (the fold reads the destination's old factors),
then applies p_v <- p_v - step * (grad[v] + reg * p_v).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..engine import EdgeKernel, Frontier, edge_map, vertex_map
from ..graph import GraphError
from ..segmenting import SegmentedGraph
from . import PhaseTiming

DEFAULT_FACTORS = 8
DEFAULT_STEP = 1e-3
DEFAULT_REG = 1e-2


def value_bytes(factors: int = DEFAULT_FACTORS) -> int:
    return 8 * factors


@njit(nogil=True, cache=True)
def _gradient_update(buf_row, src_row, dst_old_row, w):
    dot = 0.0
    for j in range(src_row.shape[0]):
        dot += src_row[j] * dst_old_row[j]
    err = dot - w
    for j in range(src_row.shape[0]):
        buf_row[j] += err * src_row[j]
    return True


@njit(nogil=True, cache=True)
def _row_add_merge(out_row, buf_row):
    for j in range(out_row.shape[0]):
        out_row[j] += buf_row[j]


@dataclass
class CFResult:
    values: np.ndarray          # (V, F) latent factors
    per_iteration: list = field(default_factory=list)


def gradient_kernel(factors: int) -> EdgeKernel:
    return EdgeKernel(0.0, _gradient_update, _row_add_merge, width=factors)


def initial_factors(vertex_count: int, factors: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((vertex_count, factors)) * 0.1


def latent_gradient(
    sg: SegmentedGraph,
    latent: np.ndarray,
    workers: int | None = None,
    timings: dict | None = None,
) -> np.ndarray:
    """One gather of the factorization gradient for every vertex."""
    if sg.base.weights is None:
        raise GraphError("collaborative filtering needs a weighted (ratings) graph")
    kernel = gradient_kernel(latent.shape[1])
    full = Frontier.full(sg.base.vertex_count)
    grad, _ = edge_map(sg, full, latent, latent, kernel, workers=workers, timings=timings)
    return grad


def collaborative_filter(
    sg: SegmentedGraph,
    iterations: int = 5,
    factors: int = DEFAULT_FACTORS,
    step: float = DEFAULT_STEP,
    reg: float = DEFAULT_REG,
    init: np.ndarray | None = None,
    seed: int = 0,
    workers: int | None = None,
) -> CFResult:
    if sg.base.weights is None:
        raise GraphError("collaborative filtering needs a weighted (ratings) graph")
    v_count = sg.base.vertex_count
    if init is None:
        latent = initial_factors(v_count, factors, seed)
    else:
        latent = np.array(init, dtype=np.float64)
        if latent.shape != (v_count, factors):
            raise GraphError(
                f"initial factors shape {latent.shape} does not match (V, F) = {(v_count, factors)}"
            )

    full = Frontier.full(v_count)
    per_iteration = []
    for _ in range(iterations):
        tm: dict = {}
        grad = latent_gradient(sg, latent, workers=workers, timings=tm)
        t0 = time.perf_counter()

        def descend(ids):
            # full-frontier app: update the dense factor matrix in place
            latent -= step * (grad + reg * latent)
            return np.ones(ids.size, dtype=np.bool_)

        vertex_map(full, descend, batch=True)
        per_iteration.append(PhaseTiming.from_parts(tm, time.perf_counter() - t0))

    return CFResult(values=latent, per_iteration=per_iteration)


def rating_error(sg: SegmentedGraph, latent: np.ndarray) -> float:
    """Sum of squared rating residuals over all (directed) rating edges."""
    g = sg.base
    if g.weights is None:
        raise GraphError("rating_error needs a weighted graph")
    rows = np.repeat(np.arange(g.vertex_count), g.row_degrees)
    dots = np.einsum("ij,ij->i", latent[g.neighbors], latent[rows])
    return float(np.sum((dots - g.weights) ** 2))
