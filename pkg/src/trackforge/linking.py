"""Link per-frame proposals into tracks via flow-compensated IoU matching.

The builder is a sequential state machine over one video. For every frame
transition, each live track's reference box is shifted by the mean optical
flow inside it and matched greedily against the next frame's proposals;
matches refresh a time-to-live counter, misses drain it, and a track dies
when the counter reaches zero. Interior gaps left by misses that were later
recovered are closed by linear interpolation.

Determinism contract (both this builder and the naive oracle in
:mod:`trackforge.synth` pin the same choices):

* live tracks are processed in ascending id order, so older tracks pick
  candidates first;
* each candidate box is consumable by at most one track per frame;
* a track takes the not-yet-consumed candidate with the highest
  compensated IoU, requiring strictly ``iou > iou_thresh``; IoU ties break
  toward the earlier candidate position;
* every unconsumed candidate then seeds a new track, ids ascending in
  candidate order;
* during a gap the reference box keeps moving: each missed transition
  shifts it by that frame pair's mean flow, so the accumulated offset is
  applied by the time a late match is attempted.

Builds for distinct videos share no state and may run fully in parallel.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

from .errors import EmptySupport, MissingFlow, NotAGap
from .flow import mean_offset, shift
from .geometry import Box, iou

if TYPE_CHECKING:
    from .io import FrameProposals


class Provenance(enum.Enum):
    MATCHED = "M"
    INTERPOLATED = "I"


@dataclass
class TrackEntry:
    """One box of a track.

    ``match_iou`` is present exactly on matched entries other than the seed
    box. ``box_index`` is the source proposal's position within its frame's
    loaded proposal list (absent on interpolated entries); probability files
    reference boxes by it.
    """

    frame: int
    box: Box
    provenance: Provenance
    match_iou: float | None = None
    box_index: int | None = None

    def __post_init__(self):
        if self.provenance is Provenance.INTERPOLATED and self.match_iou is not None:
            raise ValueError("interpolated entries carry no match IoU")


@dataclass
class Track:
    """A finalized, gapless succession of boxes through one video.

    ``score_mean`` averages the proposal scores of matched entries,
    ``iou_mean`` averages the match IoUs (0 for single-entry tracks), and
    ``rank`` is their weighted combination, filled in by
    :func:`trackforge.ranking.score_track`.
    """

    id: int
    video: str
    entries: list[TrackEntry] = field(default_factory=list)
    score_mean: float = 0.0
    iou_mean: float = 0.0
    rank: float = 0.0

    def __len__(self):
        return len(self.entries)

    @property
    def first_frame(self) -> int:
        return self.entries[0].frame

    @property
    def last_frame(self) -> int:
        return self.entries[-1].frame


@dataclass(frozen=True)
class BuilderConfig:
    iou_thresh: float = 0.5
    ttl: int = 5
    top_k: int = 25

    def __post_init__(self):
        if not (0.0 < self.iou_thresh < 1.0):
            raise ValueError("iou_thresh must lie in (0, 1)")
        if self.ttl < 1:
            raise ValueError("ttl must be >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


def interpolate_gap(before: TrackEntry, after: TrackEntry) -> list[TrackEntry]:
    """Fill the frames strictly between two matched entries.

    Each of x, y, w, h is linearly interpolated in the frame index. The
    synthesized boxes carry score 0: they hold no proposal evidence and are
    excluded from the track's score means.
    """
    if before.provenance is not Provenance.MATCHED or after.provenance is not Provenance.MATCHED:
        raise ValueError("gap endpoints must be matched entries")
    span = after.frame - before.frame
    if span < 2:
        raise NotAGap(f"frames {before.frame} and {after.frame} leave no gap to fill")
    a, b = before.box, after.box
    out = []
    for f in range(before.frame + 1, after.frame):
        t = (f - before.frame) / span
        out.append(
            TrackEntry(
                frame=f,
                box=Box(
                    x=a.x + (b.x - a.x) * t,
                    y=a.y + (b.y - a.y) * t,
                    w=a.w + (b.w - a.w) * t,
                    h=a.h + (b.h - a.h) * t,
                    score=0.0,
                ),
                provenance=Provenance.INTERPOLATED,
            )
        )
    return out


class _LiveTrack:
    __slots__ = ("id", "entries", "ttl", "ref")

    def __init__(self, id: int, seed: TrackEntry, ttl: int):
        self.id = id
        self.entries = [seed]
        self.ttl = ttl
        self.ref = seed.box  # last matched box, drifting with flow during gaps


def build_tracks(
    frames: Sequence["FrameProposals"],
    flows,
    cfg: BuilderConfig = BuilderConfig(),
) -> list[Track]:
    """Run the linking state machine over one video's proposals.

    ``flows`` maps a frame index to the field for the pair (index, index+1):
    any object with ``.get(frame) -> FlowField | None`` works, including a
    plain dict. ``flows=None`` selects zero flow (no motion compensation).
    Raises :class:`MissingFlow` when a required field is unavailable.

    Returns finalized tracks sorted by id; identical inputs and config
    produce an identical result, bit for bit.
    """
    if not frames:
        raise ValueError("frames must be nonempty")

    video = frames[0].video_id
    live: list[_LiveTrack] = []
    done: list[_LiveTrack] = []
    next_id = 0

    def seed_frame(proposals: "FrameProposals", consumed: set[int]):
        nonlocal next_id
        for idx, box in enumerate(proposals.boxes[: cfg.top_k]):
            if idx in consumed:
                continue
            seed = TrackEntry(frame=proposals.frame, box=box, provenance=Provenance.MATCHED, box_index=idx)
            live.append(_LiveTrack(next_id, seed, cfg.ttl))
            next_id += 1

    seed_frame(frames[0], set())

    for prev, cur in zip(frames, frames[1:]):
        field_ = None
        if flows is not None:
            field_ = flows.get(prev.frame)
            if field_ is None:
                raise MissingFlow(prev.frame)

        candidates = cur.boxes[: cfg.top_k]
        consumed: set[int] = set()
        still_live: list[_LiveTrack] = []
        for track in live:  # ascending id order by construction
            if field_ is None:
                shifted = track.ref
            else:
                try:
                    dx, dy = mean_offset(field_, track.ref)
                except EmptySupport:
                    dx, dy = 0.0, 0.0  # box outside the field carries no flow evidence
                shifted = shift(track.ref, dx, dy)

            best_idx = -1
            best_iou = 0.0
            for idx, cand in enumerate(candidates):
                if idx in consumed:
                    continue
                v = iou(shifted, cand)
                if v > best_iou:
                    best_iou = v
                    best_idx = idx

            if best_idx >= 0 and best_iou > cfg.iou_thresh:
                consumed.add(best_idx)
                track.entries.append(
                    TrackEntry(
                        frame=cur.frame,
                        box=candidates[best_idx],
                        provenance=Provenance.MATCHED,
                        match_iou=best_iou,
                        box_index=best_idx,
                    )
                )
                track.ttl = min(track.ttl + 1, cfg.ttl)
                track.ref = candidates[best_idx]
                still_live.append(track)
            else:
                track.ttl -= 1
                track.ref = shifted
                if track.ttl == 0:
                    done.append(track)
                else:
                    still_live.append(track)
        live = still_live
        seed_frame(cur, consumed)

    done.extend(live)
    tracks = [_finalize(t, video) for t in done]
    tracks.sort(key=lambda t: t.id)
    return tracks


def _finalize(live: _LiveTrack, video: str) -> Track:
    # Entries were only ever appended on seed/match, so the list already
    # ends at the last matched box; only interior gaps need filling.
    entries: list[TrackEntry] = []
    for prev, cur in zip(live.entries, live.entries[1:]):
        entries.append(prev)
        if cur.frame - prev.frame >= 2:
            entries.extend(interpolate_gap(prev, cur))
    entries.append(live.entries[-1])
    return Track(
        id=live.id,
        video=video,
        entries=entries,
        score_mean=matched_score_mean(entries),
        iou_mean=match_iou_mean(entries),
    )


def matched_score_mean(entries: Sequence[TrackEntry]) -> float:
    """Mean proposal score over matched entries (interpolated ones carry none)."""
    scores = [e.box.score for e in entries if e.provenance is Provenance.MATCHED]
    return sum(scores) / len(scores)


def match_iou_mean(entries: Sequence[TrackEntry]) -> float:
    """Mean of the recorded match IoUs; 0 when no match was ever made."""
    ious = [e.match_iou for e in entries if e.match_iou is not None]
    if not ious:
        return 0.0
    return sum(ious) / len(ious)
