"""Axis-aligned box arithmetic: areas, spatial IoU, and track-volume IoU.

Boxes are closed rectangles in continuous coordinates, so interpolated
(fractional) boxes are first-class. All functions are pure and safe to
call from any number of concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping

if TYPE_CHECKING:
    from .linking import Track


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle with a proposal score.

    ``x``/``y`` locate the left/top edge in pixels, ``w``/``h`` must be
    positive, and ``score`` is a normalized objectness score in [0, 1]
    (0 for boxes that carry no proposal evidence, e.g. interpolated ones).
    """

    x: float
    y: float
    w: float
    h: float
    score: float = 0.0

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box sides must be positive, got w={self.w}, h={self.h}")
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"box score must lie in [0, 1], got {self.score}")

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h


def _corners(b: Box):
    # Areas are always derived from these corner differences so that
    # identical boxes produce bit-identical intersection and union terms.
    return b.x, b.y, b.x + b.w, b.y + b.h


def _intersection_area(a_corners, b_corners) -> float:
    ax1, ay1, ax2, ay2 = a_corners
    bx1, by1, bx2, by2 = b_corners
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return iw * ih


def _area(corners) -> float:
    x1, y1, x2, y2 = corners
    return (x2 - x1) * (y2 - y1)


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two boxes; symmetric, 0 when disjoint."""
    ca, cb = _corners(a), _corners(b)
    inter = _intersection_area(ca, cb)
    union = _area(ca) + _area(cb) - inter
    return inter / union


def viou(t: "Track | Mapping[int, Box]", u: "Track | Mapping[int, Box]") -> float:
    """Volume IoU of two tracks: per-frame areas summed over time.

    The numerator sums intersection areas over frames where both tracks
    are active; the denominator sums union areas over frames where either
    is active, a lone track contributing its own box area. This is the
    direct 2D->3D lift of spatial IoU and reduces to it for length-1
    tracks. Tracks must be finalized (gapless).
    """
    fa = _frame_boxes(t)
    fb = _frame_boxes(u)
    inter_sum = 0.0
    union_sum = 0.0
    for frame in sorted(fa.keys() | fb.keys()):
        a = fa.get(frame)
        b = fb.get(frame)
        if a is not None and b is not None:
            ca, cb = _corners(a), _corners(b)
            inter = _intersection_area(ca, cb)
            inter_sum += inter
            union_sum += _area(ca) + _area(cb) - inter
        elif a is not None:
            union_sum += _area(_corners(a))
        else:
            union_sum += _area(_corners(b))
    return inter_sum / union_sum


def _frame_boxes(t) -> Mapping[int, Box]:
    if isinstance(t, Mapping):
        return t
    return {e.frame: e.box for e in t.entries}
