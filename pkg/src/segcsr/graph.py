"""Core graph representations: edge lists and compressed sparse row adjacency.

The CSR layout here is destination-grouped ("in-edges") by default: row v
stores the sources of edges into v, which is the layout a pull-style engine
consumes. Neighbor lists are kept sorted ascending so that structural
equality, deduplication and downstream segmentation are all well defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

VERTEX_DTYPE = np.uint32    # vertex ids: up to 2**32 - 1 vertices
EDGE_INDEX_DTYPE = np.int64  # edge offsets/counts: comfortably holds 2**48 edges
WEIGHT_DTYPE = np.float64

IN_EDGES = "in"
OUT_EDGES = "out"


class GraphError(ValueError):
    """Structural problem with an edge list or CSR graph."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass
class EdgeList:
    """Directed edges as parallel src/dst arrays, optionally weighted.

    Weights are all-or-nothing: either every edge carries one or none does.
    """

    src: np.ndarray
    dst: np.ndarray
    vertex_count: int
    weights: Optional[np.ndarray] = None

    @classmethod
    def from_pairs(cls, pairs, vertex_count=None, weights=None) -> "EdgeList":
        pairs = list(pairs)
        if pairs:
            src = np.array([p[0] for p in pairs], dtype=np.int64)
            dst = np.array([p[1] for p in pairs], dtype=np.int64)
        else:
            src = np.empty(0, dtype=np.int64)
            dst = np.empty(0, dtype=np.int64)
        if vertex_count is None:
            vertex_count = int(max(src.max(initial=-1), dst.max(initial=-1))) + 1
        el = cls(
            src=src.astype(VERTEX_DTYPE),
            dst=dst.astype(VERTEX_DTYPE),
            vertex_count=int(vertex_count),
            weights=None if weights is None else np.asarray(weights, dtype=WEIGHT_DTYPE),
        )
        el.validate()
        return el

    @property
    def edge_count(self) -> int:
        return int(self.src.shape[0])

    def validate(self) -> None:
        if self.src.shape != self.dst.shape:
            raise GraphError("src and dst arrays must have equal length")
        if self.weights is not None and self.weights.shape[0] != self.edge_count:
            raise GraphError("weights must cover every edge or be absent")
        if self.vertex_count < 0:
            raise GraphError("vertex_count must be non-negative")
        for name, ids in (("src", self.src), ("dst", self.dst)):
            bad = np.flatnonzero(ids.astype(np.int64) >= self.vertex_count)
            if bad.size:
                raise GraphError(
                    f"{name} id {int(ids[bad[0]])} out of range at edge index {int(bad[0])}"
                )


def simplify(el: EdgeList, drop_self_loops: bool = False, dedup: bool = False) -> EdgeList:
    """Optional post-pass: remove self loops and/or duplicate edges.

    Duplicate detection ignores weights; the first occurrence (in the
    canonical (src, dst) order) wins.
    """
    src, dst, w = el.src, el.dst, el.weights
    if drop_self_loops:
        keep = src != dst
        src, dst = src[keep], dst[keep]
        w = None if w is None else w[keep]
    if dedup and src.size:
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        w = None if w is None else w[order]
        first = np.ones(src.size, dtype=bool)
        first[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
        src, dst = src[first], dst[first]
        w = None if w is None else w[first]
    return EdgeList(src=src, dst=dst, vertex_count=el.vertex_count, weights=w)


def symmetrize(el: EdgeList) -> EdgeList:
    """Add the reverse of every edge (weights duplicated)."""
    src = np.concatenate([el.src, el.dst])
    dst = np.concatenate([el.dst, el.src])
    w = None if el.weights is None else np.concatenate([el.weights, el.weights])
    return EdgeList(src=src, dst=dst, vertex_count=el.vertex_count, weights=w)


@dataclass
class CSRGraph:
    """Compressed sparse row adjacency plus per-vertex out-degrees.

    orientation == "in": row v lists the sources of edges into v (pull layout).
    orientation == "out": row v lists the destinations of edges out of v.
    out_degree is always the out-degree of the underlying directed edge set,
    regardless of orientation. Arrays are frozen; instances are safe to share
    across threads.
    """

    vertex_count: int
    edge_count: int
    offsets: np.ndarray     # EDGE_INDEX_DTYPE, length vertex_count + 1
    neighbors: np.ndarray   # VERTEX_DTYPE, length edge_count
    out_degree: np.ndarray  # EDGE_INDEX_DTYPE, length vertex_count
    orientation: str
    weights: Optional[np.ndarray] = None

    @property
    def row_degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def in_degree(self) -> np.ndarray:
        if self.orientation == IN_EDGES:
            return self.row_degrees
        return np.bincount(self.neighbors, minlength=self.vertex_count).astype(EDGE_INDEX_DTYPE)

    @property
    def average_degree(self) -> float:
        return self.edge_count / self.vertex_count if self.vertex_count else 0.0


def _group_to_csr(group, entry, weights, vertex_count):
    """Sort edges by (group, entry) and emit offsets/neighbors/weights."""
    order = np.lexsort((entry, group))
    neighbors = _freeze(entry[order].astype(VERTEX_DTYPE, copy=False))
    counts = np.bincount(group, minlength=vertex_count)
    offsets = np.zeros(vertex_count + 1, dtype=EDGE_INDEX_DTYPE)
    np.cumsum(counts, out=offsets[1:])
    w = None if weights is None else _freeze(weights[order].astype(WEIGHT_DTYPE, copy=False))
    return _freeze(offsets), neighbors, w


def build_csr(el: EdgeList, orientation: str = IN_EDGES) -> CSRGraph:
    """Build a canonical CSR graph (neighbor lists sorted ascending).

    Raises GraphError naming the offending edge index when an id is out of
    range.
    """
    if orientation not in (IN_EDGES, OUT_EDGES):
        raise GraphError(f"unknown orientation {orientation!r}")
    el.validate()
    if orientation == IN_EDGES:
        group, entry = el.dst, el.src
    else:
        group, entry = el.src, el.dst
    offsets, neighbors, weights = _group_to_csr(group, entry, el.weights, el.vertex_count)
    out_degree = _freeze(
        np.bincount(el.src, minlength=el.vertex_count).astype(EDGE_INDEX_DTYPE)
    )
    return CSRGraph(
        vertex_count=el.vertex_count,
        edge_count=el.edge_count,
        offsets=offsets,
        neighbors=neighbors,
        out_degree=out_degree,
        orientation=orientation,
        weights=weights,
    )


def edges_of(g: CSRGraph):
    """Flatten a CSR graph back to (src, dst, weights) edge arrays."""
    rows = np.repeat(
        np.arange(g.vertex_count, dtype=VERTEX_DTYPE), g.row_degrees
    )
    if g.orientation == IN_EDGES:
        return g.neighbors.copy(), rows, None if g.weights is None else g.weights.copy()
    return rows, g.neighbors.copy(), None if g.weights is None else g.weights.copy()


def to_edge_list(g: CSRGraph) -> EdgeList:
    src, dst, w = edges_of(g)
    return EdgeList(src=src, dst=dst, vertex_count=g.vertex_count, weights=w)


def transpose(g: CSRGraph) -> CSRGraph:
    """Flip the storage layout (in-edges <-> out-edges) of the same edge set.

    An involution up to the canonical neighbor ordering, which build paths
    always maintain.
    """
    rows = np.repeat(np.arange(g.vertex_count, dtype=VERTEX_DTYPE), g.row_degrees)
    offsets, neighbors, weights = _group_to_csr(
        g.neighbors.astype(np.int64, copy=False), rows, g.weights, g.vertex_count
    )
    return CSRGraph(
        vertex_count=g.vertex_count,
        edge_count=g.edge_count,
        offsets=offsets,
        neighbors=neighbors,
        out_degree=g.out_degree,
        orientation=OUT_EDGES if g.orientation == IN_EDGES else IN_EDGES,
        weights=weights,
    )


def reverse(g: CSRGraph) -> CSRGraph:
    """Reverse every edge, keeping the same orientation.

    For an in-edge graph this yields the pull layout of the reversed graph:
    row v lists v's out-neighbors in the original. The arrays coincide with
    transpose(g); only the interpretation (and out_degree) changes.
    """
    t = transpose(g)
    return CSRGraph(
        vertex_count=g.vertex_count,
        edge_count=g.edge_count,
        offsets=t.offsets,
        neighbors=t.neighbors,
        out_degree=_freeze(g.row_degrees.astype(EDGE_INDEX_DTYPE)),
        orientation=g.orientation,
        weights=t.weights,
    )


def structurally_equal(a: CSRGraph, b: CSRGraph) -> bool:
    if (a.vertex_count, a.edge_count, a.orientation) != (b.vertex_count, b.edge_count, b.orientation):
        return False
    if not (np.array_equal(a.offsets, b.offsets) and np.array_equal(a.neighbors, b.neighbors)):
        return False
    if not np.array_equal(a.out_degree, b.out_degree):
        return False
    if (a.weights is None) != (b.weights is None):
        return False
    if a.weights is not None and not np.array_equal(a.weights, b.weights):
        return False
    return True


@dataclass
class ValidationReport:
    ok: bool
    violation: Optional[str] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def validate(g: CSRGraph) -> ValidationReport:
    """Check every CSRGraph invariant; report the first violation."""

    def bad(name, detail):
        return ValidationReport(ok=False, violation=name, detail=detail)

    if g.offsets.shape[0] != g.vertex_count + 1:
        return bad("offset-length", f"offsets length {g.offsets.shape[0]} != V+1")
    if g.vertex_count >= 0 and g.offsets.shape[0] and g.offsets[0] != 0:
        return bad("offset-initial", f"offsets[0] = {int(g.offsets[0])}")
    if g.offsets[-1] != g.edge_count:
        return bad("offset-terminal", f"offsets[-1] = {int(g.offsets[-1])} != E = {g.edge_count}")
    diffs = np.diff(g.offsets)
    if (diffs < 0).any():
        v = int(np.flatnonzero(diffs < 0)[0])
        return bad("offset-monotonic", f"offsets decrease at vertex {v}")
    if g.neighbors.shape[0] != g.edge_count:
        return bad("neighbor-length", f"neighbors length {g.neighbors.shape[0]} != E")
    if g.neighbors.size and int(g.neighbors.max()) >= g.vertex_count:
        e = int(np.argmax(g.neighbors.astype(np.int64) >= g.vertex_count))
        return bad("neighbor-range", f"neighbor id out of range at edge {e}")
    if g.out_degree.shape[0] != g.vertex_count:
        return bad("degree-length", f"out_degree length {g.out_degree.shape[0]} != V")
    if int(g.out_degree.sum()) != g.edge_count:
        return bad("degree-sum", f"sum(out_degree) = {int(g.out_degree.sum())} != E")
    if g.weights is not None and g.weights.shape[0] != g.edge_count:
        return bad("weights-length", f"weights length {g.weights.shape[0]} != E")
    if g.orientation not in (IN_EDGES, OUT_EDGES):
        return bad("orientation", f"unknown orientation {g.orientation!r}")
    return ValidationReport(ok=True)
