"""End-to-end wiring for one video: link, filter, rank, suppress."""

from __future__ import annotations

from typing import Sequence

from .flow import ClampedFlows
from .io import FrameProposals
from .linking import BuilderConfig, Track, build_tracks
from .ranking import DEFAULT_WEIGHT, rank_tracks
from .suppression import SuppressionConfig, filter_short, filter_static, temporal_nms


def process_video(
    frames: Sequence[FrameProposals],
    flows,
    link_cfg: BuilderConfig = BuilderConfig(),
    supp_cfg: SuppressionConfig = SuppressionConfig(),
    weight: float = DEFAULT_WEIGHT,
) -> list[Track]:
    """Full pipeline for one video; returns surviving tracks in rank order.

    Cheap filters run first, then ranking, then NMS (which needs the rank
    scores). The static filter samples each entry's frame pair, clamped to
    the last existing pair so final-frame boxes reuse the incoming field.
    """
    tracks = build_tracks(frames, flows, link_cfg)
    tracks = filter_short(tracks, supp_cfg.min_length)
    static_view = None
    if flows is not None and len(frames) >= 2:
        static_view = ClampedFlows(flows, frames[-1].frame - 1)
    tracks = filter_static(tracks, static_view, supp_cfg.static_thresh)
    tracks = rank_tracks(tracks, weight)
    return temporal_nms(tracks, supp_cfg.nms_viou)
