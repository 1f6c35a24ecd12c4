import math

import numpy as np
import pytest

from segcsr import EdgeList, build_csr, segment_graph, symmetrize

SAMPLE_EDGES = [(1, 0), (2, 1), (0, 5), (3, 0), (4, 3), (5, 4), (3, 5)]
SAMPLE_V = 6


def sample_edge_list():
    return EdgeList.from_pairs(SAMPLE_EDGES, vertex_count=SAMPLE_V)


def random_edge_list(seed, vertex_count, edge_count, weighted=False):
    rng = np.random.default_rng(seed)
    src = rng.integers(0, vertex_count, edge_count)
    dst = rng.integers(0, vertex_count, edge_count)
    weights = rng.random(edge_count) if weighted else None
    return EdgeList(
        src=src.astype(np.uint32),
        dst=dst.astype(np.uint32),
        vertex_count=vertex_count,
        weights=weights,
    )


def random_graph(seed, vertex_count, edge_count, weighted=False, symmetric=False):
    el = random_edge_list(seed, vertex_count, edge_count, weighted)
    if symmetric:
        el = symmetrize(el)
    return build_csr(el, "in")


def segment_for_k(g, k, block_vertices=None):
    """Segment with N = ceil(V / k)."""
    n = max(1, math.ceil(g.vertex_count / k))
    if block_vertices is None:
        block_vertices = max(1, g.vertex_count // 3)
    return segment_graph(g, segment_vertices=n, block_vertices=block_vertices)


@pytest.fixture
def sample_graph():
    return build_csr(sample_edge_list(), "in")
