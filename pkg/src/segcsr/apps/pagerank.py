"""PageRank: per iteration, gather neighbor contributions with a sum fold,
then damp and refresh contributions per vertex.

Vertices with out-degree 0 contribute nothing (their contribution is defined
as 0 rather than dividing by zero), so total rank mass is not conserved for
graphs with dangling vertices.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..engine import EdgeKernel, Frontier, edge_map, vertex_map
from ..segmenting import SegmentedGraph
from . import PhaseTiming

VALUE_BYTES = 8
DEFAULT_ITERATIONS = 20
DEFAULT_DAMPING = 0.85


@njit(nogil=True, cache=True)
def _sum_update(acc, src, dst_old, w):
    return acc + src, True


@njit(nogil=True, cache=True)
def _sum_merge(acc, buf):
    return acc + buf


SUM_KERNEL = EdgeKernel(0.0, _sum_update, _sum_merge)


@dataclass
class PageRankResult:
    values: np.ndarray
    per_iteration: list = field(default_factory=list)


def contributions(ranks: np.ndarray, out_degree: np.ndarray) -> np.ndarray:
    deg = out_degree.astype(np.float64)
    return np.divide(ranks, deg, out=np.zeros_like(ranks), where=deg > 0)


def pagerank(
    sg: SegmentedGraph,
    iterations: int = DEFAULT_ITERATIONS,
    damping: float = DEFAULT_DAMPING,
    workers: int | None = None,
) -> PageRankResult:
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    v_count = sg.base.vertex_count
    base = np.float64(1.0 - damping)
    d = np.float64(damping)
    deg = sg.base.out_degree.astype(np.float64)
    spreads = deg > 0

    ranks = np.ones(v_count, dtype=np.float64)
    contrib = contributions(ranks, sg.base.out_degree)
    full = Frontier.full(v_count)
    per_iteration = []

    for _ in range(iterations):
        tm: dict = {}
        gathered, _ = edge_map(sg, full, contrib, contrib, SUM_KERNEL, workers=workers, timings=tm)
        t0 = time.perf_counter()

        def damp(ids):
            # the frontier is always full here, so work on the dense arrays
            np.multiply(gathered, d, out=ranks)
            np.add(ranks, base, out=ranks)
            np.divide(ranks, deg, out=contrib, where=spreads)
            return np.ones(ids.size, dtype=np.bool_)

        vertex_map(full, damp, batch=True)
        per_iteration.append(PhaseTiming.from_parts(tm, time.perf_counter() - t0))

    return PageRankResult(values=ranks, per_iteration=per_iteration)
