"""Connected components by min-label propagation.

Labels start as vertex ids and flow along edges with a min fold; a vertex
re-enters the frontier only when an incoming label undercuts its current one.
On a symmetrized graph the fixed point labels every vertex with the smallest
id in its weakly-connected component.
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

_NO_LABEL = np.int64(np.iinfo(np.int64).max)


@njit(nogil=True, cache=True)
def _min_update(acc, src, dst_old, w):
    new = src if src < acc else acc
    return new, src < dst_old


@njit(nogil=True, cache=True)
def _min_merge(acc, buf):
    return buf if buf < acc else acc


MIN_KERNEL = EdgeKernel(_NO_LABEL, _min_update, _min_merge)


@dataclass
class LabelPropagationResult:
    values: np.ndarray          # int64 labels
    rounds: int = 0
    per_iteration: list = field(default_factory=list)


def label_propagate(sg: SegmentedGraph, workers: int | None = None) -> LabelPropagationResult:
    """Requires edges in both directions for component semantics."""
    v_count = sg.base.vertex_count
    labels = np.arange(v_count, dtype=np.int64)
    frontier = Frontier.full(v_count)
    per_iteration = []
    rounds = 0

    while not frontier.is_empty:
        tm: dict = {}
        lowest, changed = edge_map(sg, frontier, labels, labels, MIN_KERNEL, workers=workers, timings=tm)
        t0 = time.perf_counter()

        def adopt(ids):
            labels[ids] = np.minimum(labels[ids], lowest[ids])
            return np.ones(ids.size, dtype=np.bool_)

        frontier = vertex_map(changed, adopt, batch=True)
        per_iteration.append(PhaseTiming.from_parts(tm, time.perf_counter() - t0))
        rounds += 1

    return LabelPropagationResult(values=labels, rounds=rounds, per_iteration=per_iteration)
