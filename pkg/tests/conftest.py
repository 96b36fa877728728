"""Shared brute-force oracles and random-instance generators.

The oracles here are deliberately dumb (explicit pixel/voxel membership
sets, per-pixel loops) and independent of the library's arithmetic; tests
compare the fast implementations against them exactly.
"""

import numpy as np
import pytest

from trackforge.flow import FlowField
from trackforge.geometry import Box
from trackforge.io import FrameProposals
from trackforge.linking import BuilderConfig, Provenance, Track, TrackEntry


def pixel_cells(x, y, w, h):
    return {(px, py) for px in range(x, x + w) for py in range(y, y + h)}


def pixel_iou(a, b):
    """Pixel-membership IoU for integer-coordinate boxes."""
    ca = pixel_cells(int(a.x), int(a.y), int(a.w), int(a.h))
    cb = pixel_cells(int(b.x), int(b.y), int(b.w), int(b.h))
    return len(ca & cb) / len(ca | cb)


def voxel_viou(t, u):
    """Voxel-counting volume IoU for integer-coordinate tracks."""
    def voxels(track):
        return {
            (e.frame, px, py)
            for e in track.entries
            for (px, py) in pixel_cells(int(e.box.x), int(e.box.y), int(e.box.w), int(e.box.h))
        }

    va, vb = voxels(t), voxels(u)
    return len(va & vb) / len(va | vb)


def random_int_box(rng, span=30, max_side=20):
    return Box(
        x=float(rng.integers(0, span)),
        y=float(rng.integers(0, span)),
        w=float(rng.integers(1, max_side + 1)),
        h=float(rng.integers(1, max_side + 1)),
        score=float(rng.uniform(0, 1)),
    )


def make_track(track_id, frame_boxes, video="v"):
    """Track from {frame: Box}; frames must be contiguous."""
    entries = [
        TrackEntry(frame=f, box=frame_boxes[f], provenance=Provenance.MATCHED)
        for f in sorted(frame_boxes)
    ]
    return Track(id=track_id, video=video, entries=entries)


def random_small_track(rng, track_id=0, span=12, max_side=8, max_len=6):
    start = int(rng.integers(0, 4))
    length = int(rng.integers(1, max_len + 1))
    return make_track(
        track_id,
        {f: random_int_box(rng, span=span, max_side=max_side) for f in range(start, start + length)},
    )


def random_instance(rng, max_frames=6, max_boxes=6, width=24, height=18):
    """A small random video: proposals, integer-valued flow, random config.

    Integer flow grids keep every mean exactly representable, so the
    production builder and the naive oracle must agree bit for bit.
    """
    n_frames = int(rng.integers(1, max_frames + 1))
    frames = []
    for f in range(n_frames):
        n_boxes = int(rng.integers(0, max_boxes + 1))
        boxes = []
        for _ in range(n_boxes):
            if rng.random() < 0.5:
                x = float(rng.integers(0, width - 4))
                y = float(rng.integers(0, height - 4))
            else:
                x = float(rng.uniform(0, width - 4))
                y = float(rng.uniform(0, height - 4))
            boxes.append(
                Box(x=x, y=y, w=float(rng.integers(2, 9)), h=float(rng.integers(2, 9)), score=float(rng.uniform(0, 1)))
            )
        boxes.sort(key=lambda b: -b.score)
        frames.append(FrameProposals(video_id="rnd", frame=f, boxes=boxes))

    if rng.random() < 0.2:
        flows = None
    else:
        flows = {
            f: FlowField(
                width=width,
                height=height,
                dx=rng.integers(-3, 4, size=(height, width)).astype(np.float32),
                dy=rng.integers(-3, 4, size=(height, width)).astype(np.float32),
                frame_index=f,
            )
            for f in range(n_frames - 1)
        }
    cfg = BuilderConfig(
        iou_thresh=float(rng.uniform(0.15, 0.75)),
        ttl=int(rng.integers(1, 5)),
        top_k=int(rng.integers(1, max_boxes + 2)),
    )
    return frames, flows, cfg


def canon(track):
    """Canonical comparable form of a track."""
    return (
        track.id,
        track.video,
        track.score_mean,
        track.iou_mean,
        tuple(
            (
                e.frame,
                e.box.x,
                e.box.y,
                e.box.w,
                e.box.h,
                e.box.score,
                e.provenance.value,
                e.match_iou,
                e.box_index,
            )
            for e in track.entries
        ),
    )


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240811))
