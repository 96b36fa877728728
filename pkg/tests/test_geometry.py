import numpy as np
import pytest
from hypothesis import given, strategies as st

from trackforge.geometry import Box, iou, viou

from conftest import make_track, pixel_iou, random_int_box, random_small_track, voxel_viou


def test_identical_boxes():
    a = Box(0, 0, 10, 10)
    assert iou(a, Box(0, 0, 10, 10)) == 1.0


def test_disjoint_boxes():
    assert iou(Box(0, 0, 10, 10), Box(20, 20, 5, 5)) == 0.0


def test_half_overlap_matches_pixel_count():
    a, b = Box(0, 0, 10, 10), Box(5, 0, 10, 10)
    assert iou(a, b) == 50 / 150
    assert iou(a, b) == pixel_iou(a, b)


def test_touching_edges_do_not_intersect():
    assert iou(Box(0, 0, 10, 10), Box(10, 0, 10, 10)) == 0.0


def test_invalid_box_rejected():
    with pytest.raises(ValueError):
        Box(0, 0, 0, 10)
    with pytest.raises(ValueError):
        Box(0, 0, 5, 5, score=1.5)


def test_iou_matches_pixel_oracle(rng):
    for _ in range(500):
        a, b = random_int_box(rng), random_int_box(rng)
        assert iou(a, b) == pixel_iou(a, b)


def test_iou_symmetric_random(rng):
    for _ in range(500):
        a, b = random_int_box(rng), random_int_box(rng)
        assert iou(a, b) == iou(b, a)
        assert 0.0 <= iou(a, b) <= 1.0


finite_coord = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)
finite_side = st.floats(min_value=0.01, max_value=1e3, allow_nan=False)


@given(finite_coord, finite_coord, finite_side, finite_side)
def test_iou_self_is_one_for_fractional_boxes(x, y, w, h):
    b = Box(x, y, w, h)
    assert iou(b, b) == 1.0


@given(finite_coord, finite_coord, finite_side, finite_side, finite_coord, finite_coord, finite_side, finite_side)
def test_iou_symmetry_fractional(ax, ay, aw, ah, bx, by, bw, bh):
    a, b = Box(ax, ay, aw, ah), Box(bx, by, bw, bh)
    v = iou(a, b)
    assert v == iou(b, a)
    assert 0.0 <= v <= 1.0


def test_viou_identical_tracks():
    t = make_track(0, {0: Box(0, 0, 10, 10), 1: Box(2, 0, 10, 10)})
    u = make_track(1, {0: Box(0, 0, 10, 10), 1: Box(2, 0, 10, 10)})
    assert viou(t, u) == 1.0


def test_viou_disjoint_frame_ranges():
    t = make_track(0, {0: Box(0, 0, 10, 10), 1: Box(0, 0, 10, 10)})
    u = make_track(1, {5: Box(0, 0, 10, 10)})
    assert viou(t, u) == 0.0


def test_viou_partial_temporal_overlap():
    # same box on frames 0-1 vs frame 1 only: intersection 100, union 200
    t = make_track(0, {0: Box(0, 0, 10, 10), 1: Box(0, 0, 10, 10)})
    u = make_track(1, {1: Box(0, 0, 10, 10)})
    assert viou(t, u) == 0.5
    assert viou(t, u) == voxel_viou(t, u)


def test_viou_reduces_to_iou_for_single_frames():
    a, b = Box(0, 0, 10, 10), Box(5, 0, 10, 10)
    t, u = make_track(0, {3: a}), make_track(1, {3: b})
    assert viou(t, u) == iou(a, b)


def test_viou_matches_voxel_oracle(rng):
    for i in range(100):
        t = random_small_track(rng, track_id=0)
        u = random_small_track(rng, track_id=1)
        v = viou(t, u)
        assert v == voxel_viou(t, u)
        assert v == viou(u, t)
        assert viou(t, t) == 1.0


def test_viou_accepts_frame_box_mappings():
    m = {0: Box(0, 0, 10, 10)}
    assert viou(m, m) == 1.0
