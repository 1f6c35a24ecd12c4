"""Cache-conscious graph analytics on segmented CSR graphs."""

__version__ = "0.1.0"

from .graph import (
    CSRGraph,
    EdgeList,
    GraphError,
    IN_EDGES,
    OUT_EDGES,
    build_csr,
    edges_of,
    reverse,
    simplify,
    structurally_equal,
    symmetrize,
    to_edge_list,
    transpose,
    validate,
)
from .io import (
    BinaryFormatError,
    EdgeListParseError,
    load_graph,
    parse_edge_list,
    read_binary,
    write_binary,
    write_edge_list_text,
)
from .rmat import rmat_generate
from .clustering import (
    Permutation,
    apply_permutation,
    frequency_cluster,
    random_permutation,
)
from .segmenting import (
    SegmentedGraph,
    Subgraph,
    TrafficEstimate,
    appearance_counts,
    estimate_traffic,
    expansion_factor,
    expansion_sweep,
    segment_graph,
    vertices_per_cache,
)
from .engine import (
    EdgeKernel,
    EngineError,
    Frontier,
    chunk_by_edges,
    edge_map,
    resolve_workers,
    vertex_map,
)
from . import apps

__all__ = [
    "CSRGraph",
    "EdgeList",
    "GraphError",
    "IN_EDGES",
    "OUT_EDGES",
    "build_csr",
    "edges_of",
    "reverse",
    "simplify",
    "structurally_equal",
    "symmetrize",
    "to_edge_list",
    "transpose",
    "validate",
    "BinaryFormatError",
    "EdgeListParseError",
    "load_graph",
    "parse_edge_list",
    "read_binary",
    "write_binary",
    "write_edge_list_text",
    "rmat_generate",
    "Permutation",
    "apply_permutation",
    "frequency_cluster",
    "random_permutation",
    "SegmentedGraph",
    "Subgraph",
    "TrafficEstimate",
    "appearance_counts",
    "estimate_traffic",
    "expansion_factor",
    "expansion_sweep",
    "segment_graph",
    "vertices_per_cache",
    "EdgeKernel",
    "EngineError",
    "Frontier",
    "chunk_by_edges",
    "edge_map",
    "resolve_workers",
    "vertex_map",
    "apps",
]
