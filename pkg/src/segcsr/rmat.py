"""Recursive-matrix (RMAT) synthetic graph generator, Graph500-style.

Each edge picks one quadrant per bit level with probabilities (a, b, c, d);
the chosen bits assemble the source and destination ids. Generation is
chunked but consumes a single PCG64 stream, so results are bit-reproducible
for a fixed seed.
"""

from __future__ import annotations

import numpy as np

from .graph import EdgeList, VERTEX_DTYPE, simplify

DEFAULT_A = 0.57
DEFAULT_B = 0.19
DEFAULT_C = 0.19

_CHUNK_EDGES = 1 << 18


def rmat_generate(
    scale: int,
    edge_factor: int,
    a: float = DEFAULT_A,
    b: float = DEFAULT_B,
    c: float = DEFAULT_C,
    seed: int = 0,
    drop_self_loops: bool = False,
    dedup: bool = False,
) -> EdgeList:
    """Generate edge_factor * 2**scale directed edges over 2**scale vertices."""
    if scale < 0:
        raise ValueError("scale must be >= 0")
    if edge_factor < 0:
        raise ValueError("edge_factor must be >= 0")
    for name, p in (("a", a), ("b", b), ("c", c)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {name}={p} out of [0, 1]")
    if a + b + c > 1.0 + 1e-12:
        raise ValueError(f"a + b + c = {a + b + c} exceeds 1")

    vertex_count = 1 << scale
    edge_count = edge_factor << scale
    rng = np.random.default_rng(np.random.PCG64(seed))

    src = np.empty(edge_count, dtype=VERTEX_DTYPE)
    dst = np.empty(edge_count, dtype=VERTEX_DTYPE)
    t_ab = a + b        # quadrant thresholds over one uniform draw
    t_abc = a + b + c
    for lo in range(0, edge_count, _CHUNK_EDGES):
        hi = min(lo + _CHUNK_EDGES, edge_count)
        n = hi - lo
        u = rng.random((n, scale))
        quadrant = (u >= a).astype(np.uint8)
        quadrant += u >= t_ab
        quadrant += u >= t_abc
        s = np.zeros(n, dtype=np.uint64)
        d = np.zeros(n, dtype=np.uint64)
        for level in range(scale):
            shift = np.uint64(scale - 1 - level)
            q = quadrant[:, level]
            s |= ((q >> 1).astype(np.uint64)) << shift
            d |= ((q & 1).astype(np.uint64)) << shift
        src[lo:hi] = s
        dst[lo:hi] = d

    el = EdgeList(src=src, dst=dst, vertex_count=vertex_count, weights=None)
    if drop_self_loops or dedup:
        el = simplify(el, drop_self_loops=drop_self_loops, dedup=dedup)
    return el
