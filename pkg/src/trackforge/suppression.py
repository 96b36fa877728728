"""Track post-processing: length and static-content filters, temporal NMS.

Pipeline order used by the CLI: short-track filter, static filter, ranking,
then NMS (cheap filters first; NMS needs the rank scores, so it runs last).
All functions return new lists and leave their inputs untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import EmptySupport, MissingFlow
from .flow import mean_magnitude
from .geometry import viou
from .linking import Track


@dataclass(frozen=True)
class SuppressionConfig:
    nms_viou: float = 0.5
    min_length: int = 10
    static_thresh: float = 1.0  # pixels per frame

    def __post_init__(self):
        if not (0.0 < self.nms_viou <= 1.0):
            raise ValueError("nms_viou must lie in (0, 1]")
        if self.min_length < 1:
            raise ValueError("min_length must be >= 1")
        if self.static_thresh < 0.0:
            raise ValueError("static_thresh must be >= 0")


def temporal_nms(tracks: Sequence[Track], nms_viou: float) -> list[Track]:
    """Greedy NMS over volumes: keep the best-ranked track, drop overlaps.

    Tracks must carry rank scores. Rank ties break toward the lower id.
    Survivors come back in keep order (descending rank) and form an
    antichain: no two of them overlap above the threshold.
    """
    pending = sorted(tracks, key=lambda t: (-t.rank, t.id))
    kept: list[Track] = []
    while pending:
        best = pending.pop(0)
        kept.append(best)
        pending = [t for t in pending if viou(best, t) <= nms_viou]
    return kept


def filter_short(tracks: Sequence[Track], min_length: int) -> list[Track]:
    """Drop tracks with fewer entries than ``min_length``."""
    return [t for t in tracks if len(t.entries) >= min_length]


def filter_static(tracks: Sequence[Track], flows, static_thresh: float) -> list[Track]:
    """Drop tracks whose mean flow magnitude is below ``static_thresh``.

    Targets burned-in logos and captions: well-localized, never moving. The
    per-track statistic is the mean over all entries of the mean flow
    magnitude inside each box. ``flows`` follows the same protocol as in
    :func:`trackforge.linking.build_tracks`; ``None`` means zero flow, under
    which every track is static. Entries whose box lies outside the field
    contribute magnitude 0.
    """
    kept = []
    for t in tracks:
        total = 0.0
        for e in t.entries:
            if flows is None:
                continue
            field = flows.get(e.frame)
            if field is None:
                raise MissingFlow(e.frame)
            try:
                total += mean_magnitude(field, e.box)
            except EmptySupport:
                pass
        if total / len(t.entries) >= static_thresh:
            kept.append(t)
    return kept
