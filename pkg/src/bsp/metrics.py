"""Recovery of planted bimodules: recall, Jaccard and edge-error."""

from __future__ import annotations

import dataclasses
import math

from .corr import r2_sum
from .network import edge_error


def _overlap(truth, detected) -> int:
    return len(set(truth[0]) & set(detected[0])) * len(set(truth[1]) & set(detected[1]))


def recall(truth, detected) -> float:
    """|A_t & A_d| |B_t & B_d| / (|A_t| |B_t|)."""
    return _overlap(truth, detected) / (len(truth[0]) * len(truth[1]))


def jaccard(truth, detected) -> float:
    """Jaccard index of the two pair sets A x B."""
    inter = _overlap(truth, detected)
    union = len(truth[0]) * len(truth[1]) + len(detected[0]) * len(detected[1]) - inter
    return inter / union


def strength(dataset, A, B) -> float:
    """Cross-correlation strength sqrt(r^2(A, B) / (|A||B|))."""
    return math.sqrt(r2_sum(dataset, A, B) / (len(A) * len(B)))


@dataclasses.dataclass
class RecoveryReport:
    best_recall: list
    best_jaccard: list
    best_jaccard_match: list  # index of the detection achieving best_jaccard, or None
    edge_errors: list  # per detection, None when it has no essential edges
    overlap_counts: list  # planted bimodules intersecting each detection
    mean_recall: float
    mean_jaccard: float
    mean_edge_error: float

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def _pairs(b):
    if hasattr(b, "A"):
        return (tuple(b.A), tuple(b.B))
    return (tuple(b[0]), tuple(b[1]))


def score_collection(truths, detections, truth_edges, essential=None) -> RecoveryReport:
    """Score detections against planted truths.

    ``essential`` lists the essential edges of each detection; detections
    without them get no edge-error.
    """
    truths = [_pairs(t) for t in truths]
    dets = [_pairs(d) for d in detections]
    best_r, best_j, match = [], [], []
    for t in truths:
        rs = [recall(t, d) for d in dets]
        js = [jaccard(t, d) for d in dets]
        best_r.append(max(rs, default=0.0))
        best_j.append(max(js, default=0.0))
        match.append(max(range(len(js)), key=js.__getitem__) if js else None)
    errs = []
    for i in range(len(dets)):
        edges = essential[i] if essential is not None else None
        errs.append(edge_error(edges, truth_edges) if edges else None)
    overlaps = [sum(1 for t in truths if _overlap(t, d) > 0) for d in dets]
    scored = [e for e in errs if e is not None]
    return RecoveryReport(
        best_recall=best_r,
        best_jaccard=best_j,
        best_jaccard_match=match,
        edge_errors=errs,
        overlap_counts=overlaps,
        mean_recall=sum(best_r) / len(best_r) if best_r else 0.0,
        mean_jaccard=sum(best_j) / len(best_j) if best_j else 0.0,
        mean_edge_error=sum(scored) / len(scored) if scored else 0.0,
    )
