"""
Box geometry basics
===================

Everything in the tracker reduces to axis-aligned box arithmetic: spatial
IoU for frame-to-frame matching and its temporal lift (volume IoU) for
deduplicating whole tracks.
"""

from trackforge import Box, iou, viou
from trackforge.linking import Provenance, Track, TrackEntry

# Spatial IoU: overlap area / union area
a = Box(0, 0, 10, 10)
b = Box(5, 0, 10, 10)
print("identical:", iou(a, a))            # 1.0
print("disjoint:", iou(a, Box(20, 20, 5, 5)))  # 0.0
print("half-shifted:", iou(a, b))          # 50 / 150 = 1/3

# Boxes are continuous: fractional coordinates are first-class, which is
# what makes interpolated boxes (see demo 02) well-defined.
print("fractional:", iou(Box(0.25, 0.5, 3.5, 2.25), Box(1.0, 0.5, 3.5, 2.25)))


def track(track_id, frame_boxes):
    entries = [TrackEntry(f, frame_boxes[f], Provenance.MATCHED) for f in sorted(frame_boxes)]
    return Track(id=track_id, video="demo", entries=entries)


# Volume IoU sums per-frame areas over time. A frame where only one track
# is active contributes its whole box area to the union, nothing to the
# intersection, so shortening a track's support dilutes its vIoU.
two_frames = track(0, {0: a, 1: a})
one_frame = track(1, {1: a})
print("temporal half overlap:", viou(two_frames, one_frame))  # 100 / 200 = 0.5

# vIoU reduces to plain IoU for single-frame tracks
print("reduces to iou:", viou(track(0, {3: a}), track(1, {3: b})), "==", iou(a, b))
