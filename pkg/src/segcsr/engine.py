"""Pull-based execution over a segmented graph.

edge_map runs in two phases. Phase one visits subgraphs one at a time in
ascending segment order; within a subgraph, destinations are processed in
parallel and each local destination folds its in-edges (in CSR order) into a
private buffer slot, so no write ever needs synchronization. Phase two is a
blocked merge: the global id space is tiled into blocks, blocks are processed
in parallel, and within a block the per-subgraph buffers are folded into the
dense output in ascending segment order. Both fold orders are fixed, which
makes results identical for any worker count.

Kernels are compiled with numba on first use (pass jit=False to run the
plain-Python reference path instead). Worker threads execute nogil-compiled
chunks pulled from a shared queue, which doubles as the load balancer: chunks
are sized by edge count, not vertex count.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np
from numba.typed import List as _TypedList

from .segmenting import SegmentedGraph

DEFAULT_GRAIN_EDGES = 4096
WORKERS_ENV_VAR = "SEGCSR_WORKERS"


class EngineError(ValueError):
    pass


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV_VAR)
        workers = int(env) if env else (os.cpu_count() or 1)
    if workers < 1:
        raise EngineError("worker count must be >= 1")
    return workers


_pools: dict = {}


def _pool(workers: int) -> ThreadPoolExecutor:
    pool = _pools.get(workers)
    if pool is None:
        pool = ThreadPoolExecutor(max_workers=workers)
        _pools[workers] = pool
    return pool


def _run_tasks(fn, tasks, workers: int) -> None:
    if workers <= 1 or len(tasks) <= 1:
        for t in tasks:
            fn(t)
    else:
        # shared-queue scheduling: idle threads pull the next chunk
        list(_pool(workers).map(fn, tasks))


@dataclass
class Frontier:
    """Dense boolean membership mask over the vertex set."""

    mask: np.ndarray

    @classmethod
    def full(cls, vertex_count: int) -> "Frontier":
        return cls(np.ones(vertex_count, dtype=np.bool_))

    @classmethod
    def empty(cls, vertex_count: int) -> "Frontier":
        return cls(np.zeros(vertex_count, dtype=np.bool_))

    @classmethod
    def from_vertices(cls, vertex_count: int, ids) -> "Frontier":
        mask = np.zeros(vertex_count, dtype=np.bool_)
        mask[np.asarray(ids, dtype=np.int64)] = True
        return cls(mask)

    @property
    def vertex_count(self) -> int:
        return int(self.mask.shape[0])

    @property
    def active_count(self) -> int:
        return int(np.count_nonzero(self.mask))

    @property
    def is_empty(self) -> bool:
        return not self.mask.any()

    def vertices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)


def _as_njit(fn):
    if isinstance(fn, numba.core.dispatcher.Dispatcher):
        return fn
    return numba.njit(nogil=True, cache=True)(fn)


class EdgeKernel:
    """A fold over in-edges: identity element, per-edge update, and the
    associative/commutative merge that combines per-segment partials.

    Scalar kernels (width == 0) are functional:
        edge_update(acc, src_val, dst_old_val, weight) -> (new_acc, activate)
        merge(acc, buf_val) -> new_acc
    Vector kernels (width == F) mutate rows in place:
        edge_update(buf_row, src_row, dst_old_row, weight) -> activate
        merge(out_row, buf_row) -> None

    activate marks the destination for the next frontier. dst_old is the
    caller's read-only snapshot of destination values; kernels that ignore it
    pay nothing for it.
    """

    def __init__(self, identity, edge_update, merge, width: int = 0, jit: bool = True):
        self.identity = identity
        self.edge_update = edge_update
        self.merge = merge
        self.width = int(width)
        self.jit = jit
        self.dtype = np.asarray(identity).dtype
        self._ops = None

    def _compiled(self):
        if self._ops is None:
            # compiled folds are shared between kernels with the same
            # functions (the vector width is shape-generic)
            key = (self.edge_update, self.merge, type(self.identity), self.identity, bool(self.width))
            ops = _ops_cache.get(key)
            if ops is None:
                build = _compile_vector_ops if self.width else _compile_scalar_ops
                ops = build(_as_njit(self.edge_update), _as_njit(self.merge), self.identity)
                _ops_cache[key] = ops
            self._ops = ops
        return self._ops


_ops_cache: dict = {}


def _compile_scalar_ops(edge_update, merge, identity):
    @numba.njit(nogil=True)
    def fold(lo, hi, offsets, neighbors, weights, has_w, frontier, src_vals, dst_old, idx_map, buf, next_mask):
        for d in range(lo, hi):
            g = idx_map[d]
            acc = identity
            activated = False
            old = dst_old[g]
            for e in range(offsets[d], offsets[d + 1]):
                s = neighbors[e]
                if frontier[s]:
                    if has_w:
                        w = weights[e]
                    else:
                        w = 0.0
                    acc, act = edge_update(acc, src_vals[s], old, w)
                    if act:
                        activated = True
            buf[d] = acc
            if activated:
                next_mask[g] = True

    @numba.njit(nogil=True)
    def merge_run(b_lo, b_hi, starts, ends, idx_maps, bufs, out):
        for b in range(b_lo, b_hi):
            for s in range(len(bufs)):
                im = idx_maps[s]
                bf = bufs[s]
                for i in range(starts[s][b], ends[s][b]):
                    g = im[i]
                    out[g] = merge(out[g], bf[i])

    return fold, merge_run


def _compile_vector_ops(edge_update, merge, identity):
    @numba.njit(nogil=True)
    def fold(lo, hi, offsets, neighbors, weights, has_w, frontier, src_vals, dst_old, idx_map, buf, next_mask):
        width = buf.shape[1]
        for d in range(lo, hi):
            g = idx_map[d]
            row = buf[d]
            for j in range(width):
                row[j] = identity
            activated = False
            old = dst_old[g]
            for e in range(offsets[d], offsets[d + 1]):
                s = neighbors[e]
                if frontier[s]:
                    if has_w:
                        w = weights[e]
                    else:
                        w = 0.0
                    if edge_update(row, src_vals[s], old, w):
                        activated = True
            if activated:
                next_mask[g] = True

    @numba.njit(nogil=True)
    def merge_run(b_lo, b_hi, starts, ends, idx_maps, bufs, out):
        for b in range(b_lo, b_hi):
            for s in range(len(bufs)):
                im = idx_maps[s]
                bf = bufs[s]
                for i in range(starts[s][b], ends[s][b]):
                    merge(out[im[i]], bf[i])

    return fold, merge_run


def chunk_by_edges(offsets, grain_edges: int):
    """Tile [0, V) into consecutive ranges of at most grain_edges edges.

    A single vertex whose own degree exceeds the grain gets a range of its
    own; ranges always partition the vertex set.
    """
    if grain_edges < 1:
        raise EngineError("grain_edges must be >= 1")
    offsets = np.asarray(offsets)
    n = int(offsets.shape[0]) - 1
    ranges = []
    lo = 0
    while lo < n:
        hi = int(np.searchsorted(offsets, offsets[lo] + grain_edges, side="right")) - 1
        hi = min(max(hi, lo + 1), n)
        ranges.append((lo, hi))
        lo = hi
    return ranges


def _static_lists(sg: SegmentedGraph):
    cached = sg._engine_cache.get("static")
    if cached is None:
        starts = _TypedList()
        ends = _TypedList()
        idx_maps = _TypedList()
        for sub in sg.subgraphs:
            starts.append(sub.block_starts)
            ends.append(sub.block_ends)
            idx_maps.append(sub.idx_map)
        cached = (starts, ends, idx_maps)
        sg._engine_cache["static"] = cached
    return cached


def _buffers(sg: SegmentedGraph, dtype, width: int):
    key = ("buf", np.dtype(dtype).str, width)
    cached = sg._engine_cache.get(key)
    if cached is None:
        shape = (lambda n: (n, width)) if width else (lambda n: (n,))
        arrays = [np.empty(shape(sub.dest_count), dtype=dtype) for sub in sg.subgraphs]
        typed = _TypedList()
        for a in arrays:
            typed.append(a)
        cached = (arrays, typed)
        sg._engine_cache[key] = cached
    return cached


def _chunks(sg: SegmentedGraph, grain_edges: int):
    key = ("chunks", grain_edges)
    cached = sg._engine_cache.get(key)
    if cached is None:
        cached = [chunk_by_edges(sub.offsets, grain_edges) for sub in sg.subgraphs]
        sg._engine_cache[key] = cached
    return cached


def _coalesce(ranges, max_tasks: int):
    """Group contiguous ranges into at most max_tasks spans of ~equal count.

    chunk_by_edges tiles the vertex range, so a run of chunks collapses to a
    single (lo, hi) span; splitting at chunk boundaries keeps the spans
    edge-balanced while capping per-task dispatch overhead.
    """
    if len(ranges) <= max_tasks:
        return ranges
    bounds = np.linspace(0, len(ranges), max_tasks + 1).astype(np.int64)
    return [
        (ranges[int(bounds[i])][0], ranges[int(bounds[i + 1]) - 1][1])
        for i in range(max_tasks)
        if bounds[i] < bounds[i + 1]
    ]


def _check_values(sg, name, values, width):
    values = np.asarray(values)
    expected = (sg.base.vertex_count, width) if width else (sg.base.vertex_count,)
    if values.shape != expected:
        raise EngineError(f"{name} has shape {values.shape}, expected {expected}")
    return values


_NO_WEIGHTS = np.empty(0, dtype=np.float64)


def edge_map(
    sg: SegmentedGraph,
    frontier: Frontier,
    src_values,
    dst_old,
    kernel: EdgeKernel,
    workers: int | None = None,
    grain_edges: int = DEFAULT_GRAIN_EDGES,
    timings: dict | None = None,
):
    """Fold kernel.edge_update over every in-edge whose source is active,
    then merge per-segment partials into a dense output.

    Returns (out_values, next_frontier). out starts at the kernel identity
    for every vertex; next_frontier holds exactly the destinations for which
    some edge_update returned activate=True. Results do not depend on the
    worker count.
    """
    v_count = sg.base.vertex_count
    if frontier.vertex_count != v_count:
        raise EngineError(f"frontier covers {frontier.vertex_count} vertices, graph has {v_count}")
    src_values = _check_values(sg, "src_values", src_values, kernel.width)
    dst_old = _check_values(sg, "dst_old", dst_old, kernel.width)
    if src_values.dtype != kernel.dtype or dst_old.dtype != kernel.dtype:
        raise EngineError(
            f"value dtype {src_values.dtype}/{dst_old.dtype} does not match kernel dtype {kernel.dtype}"
        )
    workers = resolve_workers(workers)

    out_shape = (v_count, kernel.width) if kernel.width else (v_count,)
    out = np.full(out_shape, kernel.identity, dtype=kernel.dtype)
    next_mask = np.zeros(v_count, dtype=np.bool_)
    buf_arrays, buf_typed = _buffers(sg, kernel.dtype, kernel.width)

    if not kernel.jit:
        _edge_map_python(sg, frontier.mask, src_values, dst_old, kernel, buf_arrays, out, next_mask, timings)
        return out, Frontier(next_mask)

    fold, merge_run = kernel._compiled()
    mask = frontier.mask
    chunk_lists = _chunks(sg, grain_edges)

    t0 = time.perf_counter()
    for sub, buf, chunks in zip(sg.subgraphs, buf_arrays, chunk_lists):
        if not chunks:
            continue
        weights = sub.weights if sub.weights is not None else _NO_WEIGHTS
        has_w = sub.weights is not None

        def run_chunk(bounds, sub=sub, buf=buf, weights=weights, has_w=has_w):
            lo, hi = bounds
            fold(lo, hi, sub.offsets, sub.neighbors, weights, has_w, mask,
                 src_values, dst_old, sub.idx_map, buf, next_mask)

        _run_tasks(run_chunk, _coalesce(chunks, workers * 16), workers)
    t1 = time.perf_counter()

    if sg.num_blocks:
        starts, ends, idx_maps = _static_lists(sg)
        n_tasks = min(sg.num_blocks, workers * 4)
        bounds = np.linspace(0, sg.num_blocks, n_tasks + 1).astype(np.int64)
        block_ranges = [
            (int(bounds[i]), int(bounds[i + 1]))
            for i in range(n_tasks)
            if bounds[i] < bounds[i + 1]
        ]

        def run_blocks(bounds):
            lo, hi = bounds
            merge_run(lo, hi, starts, ends, idx_maps, buf_typed, out)

        _run_tasks(run_blocks, block_ranges, workers)
    t2 = time.perf_counter()

    if timings is not None:
        timings["segment_s"] = timings.get("segment_s", 0.0) + (t1 - t0)
        timings["merge_s"] = timings.get("merge_s", 0.0) + (t2 - t1)
    return out, Frontier(next_mask)


def _edge_map_python(sg, mask, src_values, dst_old, kernel, buf_arrays, out, next_mask, timings):
    """Reference path with identical fold orders; runs serially."""
    width = kernel.width
    t0 = time.perf_counter()
    for sub, buf in zip(sg.subgraphs, buf_arrays):
        off, nb, w = sub.offsets, sub.neighbors, sub.weights
        for d in range(sub.dest_count):
            g = int(sub.idx_map[d])
            activated = False
            if width:
                row = buf[d]
                row[:] = kernel.identity
                for e in range(off[d], off[d + 1]):
                    s = int(nb[e])
                    if mask[s]:
                        wt = float(w[e]) if w is not None else 0.0
                        if kernel.edge_update(row, src_values[s], dst_old[g], wt):
                            activated = True
            else:
                acc = kernel.identity
                for e in range(off[d], off[d + 1]):
                    s = int(nb[e])
                    if mask[s]:
                        wt = float(w[e]) if w is not None else 0.0
                        acc, act = kernel.edge_update(acc, src_values[s], dst_old[g], wt)
                        if act:
                            activated = True
                buf[d] = acc
            if activated:
                next_mask[g] = True
    t1 = time.perf_counter()
    for b in range(sg.num_blocks):
        for sub, buf in zip(sg.subgraphs, buf_arrays):
            for i in range(int(sub.block_starts[b]), int(sub.block_ends[b])):
                g = int(sub.idx_map[i])
                if width:
                    kernel.merge(out[g], buf[i])
                else:
                    out[g] = kernel.merge(out[g], buf[i])
    t2 = time.perf_counter()
    if timings is not None:
        timings["segment_s"] = timings.get("segment_s", 0.0) + (t1 - t0)
        timings["merge_s"] = timings.get("merge_s", 0.0) + (t2 - t1)


def vertex_map(subset: Frontier, fn, batch: bool = False):
    """Apply fn exactly once to every active vertex; keep those mapped true.

    With batch=True, fn receives the array of active ids and returns a
    boolean keep-array of the same length (the vectorized form of the same
    contract).
    """
    ids = subset.vertices()
    if ids.size == 0:
        return Frontier(np.zeros(subset.vertex_count, dtype=np.bool_))
    if batch:
        keep = np.asarray(fn(ids), dtype=np.bool_)
        if keep.shape != ids.shape:
            raise EngineError("batch vertex function must return one flag per active vertex")
    else:
        keep = np.fromiter((bool(fn(int(v))) for v in ids), count=ids.size, dtype=np.bool_)
    if keep.all():
        return Frontier(subset.mask.copy())
    mask = np.zeros(subset.vertex_count, dtype=np.bool_)
    mask[ids[keep]] = True
    return Frontier(mask)
