"""Track scoring and ordering.

A track's rank combines its mean proposal score with its mean match IoU:
``rank = weight * score_mean + (1 - weight) * iou_mean``. Both inputs live
in [0, 1] (proposal scores are min-max normalized per video at load time,
which is what makes mixing them on one scale meaningful), so the rank does
too.
"""

from __future__ import annotations

from typing import Sequence

from .linking import Track

DEFAULT_WEIGHT = 0.5


def score_track(t: Track, weight: float = DEFAULT_WEIGHT) -> float:
    """Compute and store the track's rank score.

    ``weight`` balances proposal evidence against temporal consistency:
    1 ranks purely by mean proposal score, 0 purely by mean match IoU.
    Single-entry tracks have iou_mean 0, so they cannot outrank matched
    tracks at weight < 1.
    """
    if not (0.0 <= weight <= 1.0):
        raise ValueError("weight must lie in [0, 1]")
    t.rank = weight * t.score_mean + (1.0 - weight) * t.iou_mean
    return t.rank


def rank_tracks(tracks: Sequence[Track], weight: float = DEFAULT_WEIGHT) -> list[Track]:
    """Score every track and return them in rank order.

    Descending rank; ties go to the longer track, then the lower id, making
    the permutation a deterministic function of (score_mean, iou_mean,
    length, id).
    """
    for t in tracks:
        score_track(t, weight)
    return sorted(tracks, key=lambda t: (-t.rank, -len(t.entries), t.id))
