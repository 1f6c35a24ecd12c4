"""Applications built on the segmented engine, each with per-phase timings."""

from dataclasses import dataclass


@dataclass
class PhaseTiming:
    """Wall-clock milliseconds for one iteration of an app."""

    segment_millis: float = 0.0
    merge_millis: float = 0.0
    vertex_millis: float = 0.0

    @classmethod
    def from_parts(cls, engine_timings: dict, vertex_seconds: float) -> "PhaseTiming":
        return cls(
            segment_millis=engine_timings.get("segment_s", 0.0) * 1e3,
            merge_millis=engine_timings.get("merge_s", 0.0) * 1e3,
            vertex_millis=vertex_seconds * 1e3,
        )

    def as_report_dict(self) -> dict:
        return {
            "segmentMillis": round(self.segment_millis, 3),
            "mergeMillis": round(self.merge_millis, 3),
            "vertexMillis": round(self.vertex_millis, 3),
        }


from .pagerank import pagerank, PageRankResult  # noqa: E402
from .components import label_propagate, LabelPropagationResult  # noqa: E402
from .cf import collaborative_filter, CFResult, rating_error  # noqa: E402
from .bc import betweenness, betweenness_total, prepare_bc, BCResult, BCGraphs  # noqa: E402

__all__ = [
    "PhaseTiming",
    "pagerank",
    "PageRankResult",
    "label_propagate",
    "LabelPropagationResult",
    "collaborative_filter",
    "CFResult",
    "rating_error",
    "betweenness",
    "betweenness_total",
    "prepare_bc",
    "BCResult",
    "BCGraphs",
]
