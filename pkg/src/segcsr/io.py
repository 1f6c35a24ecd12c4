"""On-disk graph formats: whitespace edge-list text and a binary CSR format.

Binary layout (all integers little-endian):

    magic    8 bytes  b"SEGCSR\\x00\\x00"
    version  u16      1
    flags    u16      bit0 = weights present
    V        u64
    E        u64
    offsets  (V+1) x u64
    neighbors E x u64
    weights  E x f64   (only when bit0 set)

Binary files always hold the in-edge (pull) layout.
"""

from __future__ import annotations

import io as _io
import struct
from pathlib import Path

import numpy as np

from .graph import (
    CSRGraph,
    EdgeList,
    GraphError,
    IN_EDGES,
    VERTEX_DTYPE,
    WEIGHT_DTYPE,
    build_csr,
    edges_of,
    simplify,
    validate,
)

MAGIC = b"SEGCSR\x00\x00"
VERSION = 1
FLAG_WEIGHTS = 0x1
_HEADER = struct.Struct("<8sHHQQ")
HEADER_BYTES = _HEADER.size  # 28


class EdgeListParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class BinaryFormatError(ValueError):
    """kind is one of bad-magic, bad-version, bad-flags, truncated, size-mismatch."""

    def __init__(self, kind: str, message: str, offset: int = 0):
        super().__init__(f"{kind}: {message} (at byte offset {offset})")
        self.kind = kind
        self.offset = offset


def parse_edge_list(
    source,
    vertex_count=None,
    drop_self_loops: bool = False,
    dedup: bool = False,
) -> EdgeList:
    """Parse "src dst" / "src dst weight" lines into an EdgeList.

    Lines starting with '#' or '%' are comments. Mixing weighted and
    unweighted lines is rejected, as is any malformed token, with the
    offending line number. vertex_count defaults to 1 + max id seen.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r") as fh:
            return parse_edge_list(fh, vertex_count, drop_self_loops, dedup)
    if isinstance(source, str):  # pragma: no cover - guarded above
        source = _io.StringIO(source)

    srcs, dsts, weights = [], [], []
    weighted = None
    for lineno, raw in enumerate(source, 1):
        line = raw.strip()
        if not line or line[0] in "#%":
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise EdgeListParseError(f"expected 2 or 3 fields, got {len(parts)}", lineno)
        try:
            s = int(parts[0])
            d = int(parts[1])
        except ValueError:
            raise EdgeListParseError(f"malformed vertex id in {line!r}", lineno) from None
        if s < 0 or d < 0:
            raise EdgeListParseError("negative vertex id", lineno)
        has_w = len(parts) == 3
        if weighted is None:
            weighted = has_w
        elif weighted != has_w:
            raise EdgeListParseError("mixed weighted and unweighted edges", lineno)
        if has_w:
            try:
                weights.append(float(parts[2]))
            except ValueError:
                raise EdgeListParseError(f"malformed weight {parts[2]!r}", lineno) from None
        srcs.append(s)
        dsts.append(d)

    src = np.asarray(srcs, dtype=np.int64)
    dst = np.asarray(dsts, dtype=np.int64)
    if vertex_count is None:
        vertex_count = int(max(src.max(initial=-1), dst.max(initial=-1))) + 1
    el = EdgeList(
        src=src.astype(VERTEX_DTYPE),
        dst=dst.astype(VERTEX_DTYPE),
        vertex_count=int(vertex_count),
        weights=np.asarray(weights, dtype=WEIGHT_DTYPE) if weighted else None,
    )
    el.validate()
    if drop_self_loops or dedup:
        el = simplify(el, drop_self_loops=drop_self_loops, dedup=dedup)
    return el


def write_edge_list_text(g: CSRGraph, path) -> None:
    src, dst, w = edges_of(g)
    with open(path, "w") as fh:
        if w is None:
            for s, d in zip(src.tolist(), dst.tolist()):
                fh.write(f"{s} {d}\n")
        else:
            for s, d, x in zip(src.tolist(), dst.tolist(), w.tolist()):
                fh.write(f"{s} {d} {x!r}\n")


def write_binary(g: CSRGraph, path) -> None:
    if g.orientation != IN_EDGES:
        raise GraphError("binary format stores the in-edge layout; transpose first")
    report = validate(g)
    if not report:
        raise GraphError(f"refusing to write invalid graph: {report.violation}")
    flags = FLAG_WEIGHTS if g.weights is not None else 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, flags, g.vertex_count, g.edge_count))
        fh.write(g.offsets.astype("<u8", copy=False).tobytes())
        fh.write(g.neighbors.astype("<u8").tobytes())
        if g.weights is not None:
            fh.write(g.weights.astype("<f8", copy=False).tobytes())


def _read_exact(fh, n, offset, what):
    data = fh.read(n)
    if len(data) != n:
        raise BinaryFormatError(
            "truncated", f"expected {n} bytes of {what}, got {len(data)}", offset
        )
    return data


def read_binary(path) -> CSRGraph:
    with open(path, "rb") as fh:
        header = _read_exact(fh, HEADER_BYTES, 0, "header")
        magic, version, flags, v, e = _HEADER.unpack(header)
        if magic != MAGIC:
            raise BinaryFormatError("bad-magic", f"magic {magic!r}", 0)
        if version != VERSION:
            raise BinaryFormatError("bad-version", f"version {version}", 8)
        if flags & ~FLAG_WEIGHTS:
            raise BinaryFormatError("bad-flags", f"unknown flag bits 0x{flags:x}", 10)
        pos = HEADER_BYTES
        offsets = np.frombuffer(
            _read_exact(fh, (v + 1) * 8, pos, "offsets"), dtype="<u8"
        ).astype(np.int64)
        pos += (v + 1) * 8
        neighbors = np.frombuffer(
            _read_exact(fh, e * 8, pos, "neighbors"), dtype="<u8"
        )
        pos += e * 8
        weights = None
        if flags & FLAG_WEIGHTS:
            weights = np.frombuffer(
                _read_exact(fh, e * 8, pos, "weights"), dtype="<f8"
            ).astype(WEIGHT_DTYPE)
            pos += e * 8
        if fh.read(1):
            raise BinaryFormatError(
                "size-mismatch", "trailing bytes beyond the sizes in the header", pos
            )
    if neighbors.size and int(neighbors.max()) >= v:
        raise GraphError("neighbor id out of range for header vertex count")
    g = CSRGraph(
        vertex_count=int(v),
        edge_count=int(e),
        offsets=offsets,
        neighbors=neighbors.astype(VERTEX_DTYPE),
        out_degree=np.bincount(
            neighbors.astype(np.int64), minlength=int(v)
        ).astype(np.int64),
        orientation=IN_EDGES,
        weights=weights,
    )
    report = validate(g)
    if not report:
        raise BinaryFormatError("size-mismatch", f"inconsistent payload: {report.violation}", HEADER_BYTES)
    return g


def sniff_binary(path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(len(MAGIC)) == MAGIC


def load_graph(path, vertex_count=None) -> CSRGraph:
    """Load a graph file, auto-detecting binary vs text by the magic bytes."""
    if sniff_binary(path):
        return read_binary(path)
    return build_csr(parse_edge_list(path, vertex_count=vertex_count), IN_EDGES)
