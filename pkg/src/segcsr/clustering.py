"""Degree-frequency vertex clustering: a stable permutation that packs
high-out-degree vertices at the front while keeping the original relative
order within each degree band.

The sort key for vertex v is floor(out_degree(v) / threshold), ordered
descending with a stable sort. All vertices below the threshold share key 0
and therefore keep their original order at the tail, preserving whatever
locality the input ordering carried.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CSRGraph, GraphError, VERTEX_DTYPE, build_csr, to_edge_list, EdgeList


@dataclass
class Permutation:
    """A vertex relabeling: old_to_new and its exact inverse new_to_old."""

    old_to_new: np.ndarray
    new_to_old: np.ndarray

    def __post_init__(self):
        self.old_to_new = np.asarray(self.old_to_new, dtype=VERTEX_DTYPE)
        self.new_to_old = np.asarray(self.new_to_old, dtype=VERTEX_DTYPE)

    @classmethod
    def identity(cls, vertex_count: int) -> "Permutation":
        ids = np.arange(vertex_count, dtype=VERTEX_DTYPE)
        return cls(old_to_new=ids, new_to_old=ids.copy())

    @classmethod
    def from_new_to_old(cls, new_to_old) -> "Permutation":
        new_to_old = np.asarray(new_to_old, dtype=VERTEX_DTYPE)
        old_to_new = np.empty_like(new_to_old)
        old_to_new[new_to_old] = np.arange(new_to_old.size, dtype=VERTEX_DTYPE)
        return cls(old_to_new=old_to_new, new_to_old=new_to_old)

    @property
    def size(self) -> int:
        return int(self.new_to_old.shape[0])

    def check(self) -> None:
        n = self.size
        ids = np.arange(n, dtype=VERTEX_DTYPE)
        if self.old_to_new.shape[0] != n:
            raise GraphError("old_to_new and new_to_old differ in length")
        if not np.array_equal(np.sort(self.new_to_old), ids):
            raise GraphError("new_to_old is not a bijection on [0, V)")
        if not np.array_equal(self.old_to_new[self.new_to_old], ids):
            raise GraphError("old_to_new is not the inverse of new_to_old")

    def save_text(self, path) -> None:
        """Audit format: one new_to_old entry per line."""
        np.savetxt(path, self.new_to_old, fmt="%d")

    @classmethod
    def load_text(cls, path) -> "Permutation":
        data = np.loadtxt(path, dtype=np.int64, ndmin=1)
        return cls.from_new_to_old(data)


def default_threshold(g: CSRGraph) -> int:
    """Average degree, rounded up, floored at 1."""
    if g.vertex_count == 0:
        return 1
    return max(1, -(-g.edge_count // g.vertex_count))


def frequency_cluster(g: CSRGraph, threshold: int | None = None) -> Permutation:
    """Stable descending sort of vertices by floor(out_degree / threshold)."""
    if threshold is None:
        threshold = default_threshold(g)
    if threshold < 1:
        raise GraphError("threshold must be >= 1")
    key = g.out_degree.astype(np.int64) // threshold
    new_to_old = np.argsort(-key, kind="stable")
    return Permutation.from_new_to_old(new_to_old)


def random_permutation(vertex_count: int, seed: int = 0) -> Permutation:
    """Seeded uniform shuffle, for ordering experiments."""
    rng = np.random.default_rng(seed)
    return Permutation.from_new_to_old(rng.permutation(vertex_count))


def apply_permutation(g: CSRGraph, p: Permutation) -> CSRGraph:
    """Relabel every edge (u, v) to (old_to_new[u], old_to_new[v]) and
    rebuild the canonical CSR. Degree multiset and edge count are preserved."""
    if p.size != g.vertex_count:
        raise GraphError(
            f"permutation size {p.size} does not match vertex count {g.vertex_count}"
        )
    el = to_edge_list(g)
    relabeled = EdgeList(
        src=p.old_to_new[el.src],
        dst=p.old_to_new[el.dst],
        vertex_count=g.vertex_count,
        weights=el.weights,
    )
    return build_csr(relabeled, g.orientation)
