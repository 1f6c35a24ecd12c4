"""Betweenness centrality for unweighted graphs (single-source dependency
accumulation).

Forward: level-synchronous BFS over the pull layout counts shortest paths;
an edge into an already-visited vertex neither contributes nor activates.
Backward: walking levels deepest-first over the reversed graph, each vertex u
one level up accumulates (paths[u] / paths[v]) * (1 + dep[v]) over its
shortest-path successors v, realized as a sum fold of (1 + dep[v]) / paths[v]
restricted to the level frontier.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..engine import EdgeKernel, Frontier, edge_map
from ..graph import CSRGraph, GraphError, IN_EDGES, reverse
from ..segmenting import SegmentedGraph, segment_graph
from . import PhaseTiming

VALUE_BYTES = 8


@njit(nogil=True, cache=True)
def _path_update(acc, src, dst_old, w):
    if dst_old != 0.0:      # destination already visited: no new paths
        return acc, False
    return acc + src, True


@njit(nogil=True, cache=True)
def _dep_update(acc, src, dst_old, w):
    return acc + src, False


@njit(nogil=True, cache=True)
def _add_merge(acc, buf):
    return acc + buf


PATH_KERNEL = EdgeKernel(0.0, _path_update, _add_merge)
DEP_KERNEL = EdgeKernel(0.0, _dep_update, _add_merge)


@dataclass
class BCGraphs:
    """Both traversal directions of one graph, segmented for the pull engine."""

    forward: SegmentedGraph
    backward: SegmentedGraph


def prepare_bc(
    g: CSRGraph,
    segment_vertices: int | None = None,
    block_vertices: int | None = None,
    workers: int | None = None,
) -> BCGraphs:
    if g.orientation != IN_EDGES:
        raise GraphError("betweenness expects the in-edge layout")
    if g.weights is not None:
        raise GraphError("betweenness expects an unweighted graph")
    fwd = segment_graph(g, segment_vertices, block_vertices, workers=workers)
    bwd = segment_graph(reverse(g), segment_vertices, block_vertices, workers=workers)
    return BCGraphs(forward=fwd, backward=bwd)


@dataclass
class BCResult:
    values: np.ndarray          # dependency-based centrality, source zeroed
    num_paths: np.ndarray
    levels: np.ndarray          # BFS level per vertex, -1 when unreached
    per_iteration: list = field(default_factory=list)


def _as_bc_graphs(graph_or_bcg, workers):
    if isinstance(graph_or_bcg, BCGraphs):
        return graph_or_bcg
    return prepare_bc(graph_or_bcg, workers=workers)


def betweenness(graph_or_bcg, source: int, workers: int | None = None) -> BCResult:
    bcg = _as_bc_graphs(graph_or_bcg, workers)
    v_count = bcg.forward.base.vertex_count
    if not 0 <= source < v_count:
        raise ValueError(f"source {source} out of range for {v_count} vertices")

    num_paths = np.zeros(v_count, dtype=np.float64)
    visited = np.zeros(v_count, dtype=np.float64)
    levels = np.full(v_count, -1, dtype=np.int64)
    num_paths[source] = 1.0
    visited[source] = 1.0
    levels[source] = 0

    per_iteration = []
    level_vertices = [np.array([source], dtype=np.int64)]
    frontier = Frontier.from_vertices(v_count, [source])
    depth = 0
    while not frontier.is_empty:
        tm: dict = {}
        gathered, nxt = edge_map(
            bcg.forward, frontier, num_paths, visited, PATH_KERNEL, workers=workers, timings=tm
        )
        t0 = time.perf_counter()
        ids = nxt.vertices()
        depth += 1
        if ids.size:
            num_paths[ids] = gathered[ids]
            levels[ids] = depth
            visited[ids] = 1.0
            level_vertices.append(ids)
        frontier = nxt
        per_iteration.append(PhaseTiming.from_parts(tm, time.perf_counter() - t0))

    dependency = np.zeros(v_count, dtype=np.float64)
    ratios = np.zeros(v_count, dtype=np.float64)
    for depth in range(len(level_vertices) - 1, 0, -1):
        ids = level_vertices[depth]
        tm = {}
        t0 = time.perf_counter()
        ratios[:] = 0.0
        ratios[ids] = (1.0 + dependency[ids]) / num_paths[ids]
        frontier = Frontier.from_vertices(v_count, ids)
        setup = time.perf_counter() - t0
        gathered, _ = edge_map(
            bcg.backward, frontier, ratios, ratios, DEP_KERNEL, workers=workers, timings=tm
        )
        t0 = time.perf_counter()
        above = level_vertices[depth - 1]
        dependency[above] = num_paths[above] * gathered[above]
        per_iteration.append(PhaseTiming.from_parts(tm, setup + time.perf_counter() - t0))

    centrality = dependency.copy()
    centrality[source] = 0.0
    return BCResult(
        values=centrality, num_paths=num_paths, levels=levels, per_iteration=per_iteration
    )


def betweenness_total(graph_or_bcg, sources, workers: int | None = None):
    """Accumulated centrality over several source vertices."""
    bcg = _as_bc_graphs(graph_or_bcg, workers)
    total = np.zeros(bcg.forward.base.vertex_count, dtype=np.float64)
    per_iteration = []
    for s in sources:
        res = betweenness(bcg, int(s), workers=workers)
        total += res.values
        per_iteration.extend(res.per_iteration)
    return BCResult(
        values=total,
        num_paths=np.empty(0),
        levels=np.empty(0, dtype=np.int64),
        per_iteration=per_iteration,
    )
