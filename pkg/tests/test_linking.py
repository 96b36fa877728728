import pytest

from trackforge.errors import MissingFlow, NotAGap
from trackforge.flow import constant_field
from trackforge.geometry import Box
from trackforge.io import FrameProposals
from trackforge.linking import (
    BuilderConfig,
    Provenance,
    TrackEntry,
    build_tracks,
    interpolate_gap,
)

from conftest import canon, random_instance


def frames_from(video_boxes, video="v"):
    """[(frame, [Box, ...]), ...] -> FrameProposals sequence."""
    return [FrameProposals(video_id=video, frame=f, boxes=list(boxes)) for f, boxes in video_boxes]


def static_scene(box, n_frames):
    return frames_from([(f, [box]) for f in range(n_frames)])


def test_static_box_single_track():
    frames = static_scene(Box(10, 10, 20, 20, score=0.8), 5)
    tracks = build_tracks(frames, None, BuilderConfig(iou_thresh=0.5, ttl=5, top_k=25))
    assert len(tracks) == 1
    t = tracks[0]
    assert [e.frame for e in t.entries] == [0, 1, 2, 3, 4]
    assert all(e.provenance is Provenance.MATCHED for e in t.entries)
    assert t.entries[0].match_iou is None  # seed
    assert all(e.match_iou == 1.0 for e in t.entries[1:])
    assert t.score_mean == 0.8
    assert t.iou_mean == 1.0


def test_motion_compensation_is_load_bearing():
    # box hops +20 px/frame with width 10: raw IoU between consecutive
    # positions is 0, so only flow compensation can link it
    frames = frames_from([(f, [Box(20.0 * f, 0, 10, 10, score=0.9)]) for f in range(5)])
    exact = {f: constant_field(120, 20, 20.0, 0.0, frame_index=f) for f in range(4)}
    cfg = BuilderConfig(iou_thresh=0.5, ttl=5, top_k=25)

    linked = build_tracks(frames, exact, cfg)
    assert len(linked) == 1
    assert len(linked[0].entries) == 5
    assert all(e.match_iou == 1.0 for e in linked[0].entries[1:])

    unlinked = build_tracks(frames, None, cfg)
    assert len(unlinked) == 5
    assert all(len(t.entries) == 1 for t in unlinked)


def gap_scene():
    box = Box(30, 30, 12, 12, score=0.5)
    return frames_from([(0, [box]), (1, [box]), (2, []), (3, []), (4, [box])])


def test_ttl_two_splits_track():
    # ttl trace: seed 2, match at 1 (capped 2), misses at 2 and 3 drain to 0,
    # so the frame-4 box seeds a fresh track
    tracks = build_tracks(gap_scene(), None, BuilderConfig(iou_thresh=0.5, ttl=2))
    assert len(tracks) == 2
    assert [e.frame for e in tracks[0].entries] == [0, 1]
    assert [e.frame for e in tracks[1].entries] == [4]


def test_ttl_three_bridges_gap():
    tracks = build_tracks(gap_scene(), None, BuilderConfig(iou_thresh=0.5, ttl=3))
    assert len(tracks) == 1
    t = tracks[0]
    assert [e.frame for e in t.entries] == [0, 1, 2, 3, 4]
    assert [e.provenance for e in t.entries] == [
        Provenance.MATCHED,
        Provenance.MATCHED,
        Provenance.INTERPOLATED,
        Provenance.INTERPOLATED,
        Provenance.MATCHED,
    ]
    # interpolated boxes carry no proposal evidence; a static gap keeps position
    assert all(e.box.score == 0.0 for e in t.entries if e.provenance is Provenance.INTERPOLATED)
    assert (t.entries[2].box.x, t.entries[2].box.y) == (30, 30)
    assert (t.entries[3].box.x, t.entries[3].box.y) == (30, 30)


def test_reference_box_drifts_with_flow_through_gap():
    # object moves +5 px/frame; proposals vanish on frames 2-3; the reference
    # must keep moving with the accumulated flow for the frame-4 match to land
    frames = frames_from(
        [
            (0, [Box(0, 0, 10, 10, score=0.5)]),
            (1, [Box(5, 0, 10, 10, score=0.5)]),
            (2, []),
            (3, []),
            (4, [Box(20, 0, 10, 10, score=0.5)]),
        ]
    )
    flows = {f: constant_field(40, 12, 5.0, 0.0, frame_index=f) for f in range(4)}
    tracks = build_tracks(frames, flows, BuilderConfig(iou_thresh=0.5, ttl=3))
    assert len(tracks) == 1
    t = tracks[0]
    assert [e.frame for e in t.entries] == [0, 1, 2, 3, 4]
    # interpolation reconstructs the physical positions
    assert (t.entries[2].box.x, t.entries[3].box.x) == (10.0, 15.0)
    assert t.entries[4].match_iou == 1.0


def test_candidates_consumed_once():
    # two coincident seeds compete for a single continuation box
    a = Box(0, 0, 10, 10, score=0.9)
    b = Box(0, 0, 10, 10, score=0.4)
    frames = frames_from([(0, [a, b]), (1, [Box(0, 0, 10, 10, score=0.7)])])
    tracks = build_tracks(frames, None, BuilderConfig(iou_thresh=0.5, ttl=2))
    assert len(tracks) == 2
    assert len(tracks[0].entries) == 2  # older track wins the candidate
    assert len(tracks[1].entries) == 1


def test_top_k_limits_candidates():
    boxes = [Box(i * 20, 0, 10, 10, score=1.0 - i * 0.1) for i in range(5)]
    frames = frames_from([(0, boxes)])
    tracks = build_tracks(frames, None, BuilderConfig(iou_thresh=0.5, ttl=2, top_k=3))
    assert len(tracks) == 3


def test_missing_flow_raises():
    frames = static_scene(Box(0, 0, 10, 10), 3)
    flows = {0: constant_field(20, 20, 0.0, 0.0, frame_index=0)}  # field for pair 1->2 missing
    with pytest.raises(MissingFlow):
        build_tracks(frames, flows, BuilderConfig(ttl=2))


def test_empty_frames_rejected():
    with pytest.raises(ValueError):
        build_tracks([], None)


def test_determinism_bit_for_bit(rng):
    for _ in range(20):
        frames, flows, cfg = random_instance(rng)
        first = [canon(t) for t in build_tracks(frames, flows, cfg)]
        second = [canon(t) for t in build_tracks(frames, flows, cfg)]
        assert first == second


def test_structural_invariants_on_random_instances(rng):
    for _ in range(200):
        frames, flows, cfg = random_instance(rng)
        for t in build_tracks(frames, flows, cfg):
            entries = t.entries
            assert entries[0].provenance is Provenance.MATCHED
            assert entries[-1].provenance is Provenance.MATCHED
            assert all(b.frame == a.frame + 1 for a, b in zip(entries, entries[1:]))
            assert entries[0].match_iou is None
            for e in entries[1:]:
                if e.provenance is Provenance.MATCHED:
                    assert e.match_iou is not None and e.match_iou > cfg.iou_thresh
                else:
                    assert e.match_iou is None
            # a track can never bridge ttl or more consecutive misses
            run = 0
            for e in entries:
                run = run + 1 if e.provenance is Provenance.INTERPOLATED else 0
                assert run <= cfg.ttl - 1


def test_one_to_one_consumption_on_random_instances(rng):
    for _ in range(50):
        frames, flows, cfg = random_instance(rng)
        tracks = build_tracks(frames, flows, cfg)
        seen = set()
        for t in tracks:
            for e in t.entries:
                if e.box_index is not None:
                    key = (e.frame, e.box_index)
                    assert key not in seen
                    seen.add(key)


def test_interpolate_gap_midpoint():
    before = TrackEntry(0, Box(0, 0, 10, 10, 0.5), Provenance.MATCHED)
    after = TrackEntry(2, Box(10, 0, 10, 10, 0.5), Provenance.MATCHED, match_iou=0.8)
    (mid,) = interpolate_gap(before, after)
    assert mid.frame == 1
    assert (mid.box.x, mid.box.y, mid.box.w, mid.box.h) == (5, 0, 10, 10)
    assert mid.provenance is Provenance.INTERPOLATED
    assert mid.box.score == 0.0


def test_interpolate_gap_affine():
    before = TrackEntry(0, Box(0, 0, 10, 10, 0.5), Provenance.MATCHED)
    after = TrackEntry(4, Box(8, 4, 18, 10, 0.5), Provenance.MATCHED, match_iou=0.8)
    mids = interpolate_gap(before, after)
    assert [(e.box.x, e.box.y, e.box.w, e.box.h) for e in mids] == [
        (2, 1, 12, 10),
        (4, 2, 14, 10),
        (6, 3, 16, 10),
    ]
    assert [e.frame for e in mids] == [1, 2, 3]


def test_interpolate_gap_constant():
    box = Box(7, 7, 5, 5, 0.9)
    before = TrackEntry(2, box, Provenance.MATCHED)
    after = TrackEntry(6, box, Provenance.MATCHED, match_iou=1.0)
    mids = interpolate_gap(before, after)
    assert all((e.box.x, e.box.y, e.box.w, e.box.h) == (7, 7, 5, 5) for e in mids)
    assert len(mids) == 3


def test_interpolate_gap_rejects_consecutive():
    before = TrackEntry(0, Box(0, 0, 1, 1), Provenance.MATCHED)
    after = TrackEntry(1, Box(0, 0, 1, 1), Provenance.MATCHED, match_iou=1.0)
    with pytest.raises(NotAGap):
        interpolate_gap(before, after)


def test_interpolated_entry_cannot_carry_match_iou():
    with pytest.raises(ValueError):
        TrackEntry(0, Box(0, 0, 1, 1), Provenance.INTERPOLATED, match_iou=0.5)
