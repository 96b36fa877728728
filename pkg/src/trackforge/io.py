"""File formats and run manifests.

All text formats are UTF-8 with '.' as the decimal separator and LF line
endings; floats are written with ``repr`` so every round trip is lossless.

* proposals: one record per line, ``video frame x y w h raw_score``;
  blank lines and ``#`` comments are skipped.
* tracks: JSON Lines, one track object per line (streamable, diffable).
* probabilities: header ``NPROB <N>`` then one record per line,
  ``video frame box_index p_1 ... p_N`` (see :mod:`trackforge.entropy`).
* flow: binary TFLO, owned by :mod:`trackforge.flow`.

Loading is read-only and parallel-safe per file; writers assume exclusive
ownership of their output path.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .entropy import ProbVector
from .errors import NonMonotonicFrames, ParseError
from .geometry import Box
from .linking import Provenance, Track, TrackEntry
from .version import __version__


@dataclass
class FrameProposals:
    """All candidate boxes of one frame, sorted by normalized score descending."""

    video_id: str
    frame: int
    boxes: list[Box]
    raw_score_range: tuple[float, float] = (0.0, 0.0)


def normalize_scores(raw: Sequence[float]) -> tuple[list[float], tuple[float, float]]:
    """Min-max map a video's raw scores to [0, 1]; a constant video maps to 1.0.

    Monotone, so score order within the video is preserved.
    """
    lo, hi = min(raw), max(raw)
    if hi == lo:
        return [1.0 for _ in raw], (lo, hi)
    span = hi - lo
    return [(s - lo) / span for s in raw], (lo, hi)


def load_proposals(path, top_k: int | None = None) -> list[FrameProposals]:
    """Parse a proposals file into per-frame boxes with normalized scores.

    Records of one video must appear with non-decreasing frame indices.
    Output frames are grouped per video (videos in first-appearance order,
    frames ascending); each frame keeps at most ``top_k`` boxes.
    """
    records = []  # (video, frame, x, y, w, h, raw_score)
    last_frame: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 7:
                raise ParseError(f"expected 7 fields, got {len(parts)}", line=lineno)
            video = parts[0]
            try:
                frame = int(parts[1])
                x, y, w, h, raw = (float(v) for v in parts[2:])
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            if w <= 0 or h <= 0:
                raise ParseError(f"box sides must be positive, got w={w}, h={h}", line=lineno)
            if video in last_frame and frame < last_frame[video]:
                raise NonMonotonicFrames(
                    f"video {video!r} steps back from frame {last_frame[video]} to {frame}",
                    line=lineno,
                )
            last_frame[video] = frame
            records.append((video, frame, x, y, w, h, raw))
    if not records:
        raise ParseError(f"{path}: no proposal records")

    by_video: dict[str, list] = {}
    for rec in records:
        by_video.setdefault(rec[0], []).append(rec)

    out: list[FrameProposals] = []
    for video, recs in by_video.items():
        normalized, score_range = normalize_scores([r[6] for r in recs])
        frames: dict[int, list[Box]] = {}
        for rec, score in zip(recs, normalized):
            frames.setdefault(rec[1], []).append(Box(x=rec[2], y=rec[3], w=rec[4], h=rec[5], score=score))
        for frame in sorted(frames):
            boxes = sorted(frames[frame], key=lambda b: -b.score)
            if top_k is not None:
                boxes = boxes[:top_k]
            out.append(FrameProposals(video_id=video, frame=frame, boxes=boxes, raw_score_range=score_range))
    return out


def write_proposals(rows: Iterable[tuple[str, int, float, float, float, float, float]], path) -> None:
    """Write raw proposal records (video, frame, x, y, w, h, raw_score)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for video, frame, x, y, w, h, score in rows:
            fh.write(f"{video} {frame} {x!r} {y!r} {w!r} {h!r} {score!r}\n")


def group_by_video(frames: Sequence[FrameProposals]) -> dict[str, list[FrameProposals]]:
    videos: dict[str, list[FrameProposals]] = {}
    for fp in frames:
        videos.setdefault(fp.video_id, []).append(fp)
    return videos


# -- tracks -----------------------------------------------------------------


def _entry_to_row(e: TrackEntry) -> list:
    return [
        e.frame,
        e.box.x,
        e.box.y,
        e.box.w,
        e.box.h,
        e.box.score,
        e.provenance.value,
        e.match_iou,
        e.box_index,
    ]


def _entry_from_row(row, lineno: int) -> TrackEntry:
    try:
        frame, x, y, w, h, score, prov, match_iou, box_index = row
        entry = TrackEntry(
            frame=int(frame),
            box=Box(x=float(x), y=float(y), w=float(w), h=float(h), score=float(score)),
            provenance=Provenance(prov),
            match_iou=None if match_iou is None else float(match_iou),
            box_index=None if box_index is None else int(box_index),
        )
    except (ValueError, TypeError) as exc:
        raise ParseError(f"bad track entry {row!r}: {exc}", line=lineno) from exc
    return entry


def write_tracks(tracks: Sequence[Track], path) -> None:
    """Serialize tracks as JSON Lines, one track object per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in tracks:
            obj = {
                "id": t.id,
                "video": t.video,
                "score_mean": t.score_mean,
                "iou_mean": t.iou_mean,
                "rank": t.rank,
                "entries": [_entry_to_row(e) for e in t.entries],
            }
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def load_tracks(path) -> list[Track]:
    """Load tracks, validating that each one is gapless and well-formed."""
    tracks: list[Track] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                obj = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            try:
                entries = [_entry_from_row(row, lineno) for row in obj["entries"]]
                track = Track(
                    id=int(obj["id"]),
                    video=str(obj["video"]),
                    entries=entries,
                    score_mean=float(obj["score_mean"]),
                    iou_mean=float(obj["iou_mean"]),
                    rank=float(obj["rank"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad track object: {exc}", line=lineno) from exc
            if not entries:
                raise ParseError("track has no entries", line=lineno)
            for prev, cur in zip(entries, entries[1:]):
                if cur.frame != prev.frame + 1:
                    raise ParseError(
                        f"track {track.id} is not gapless: frame {prev.frame} -> {cur.frame}",
                        line=lineno,
                    )
            tracks.append(track)
    return tracks


# -- probability vectors ----------------------------------------------------


def write_probs(vectors: Sequence[ProbVector], path) -> None:
    """Write probability records under a ``NPROB <N>`` header."""
    if not vectors:
        raise ValueError("nothing to write")
    n = vectors[0].probs.size
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"NPROB {n}\n")
        for v in vectors:
            if v.probs.size != n:
                raise ValueError(f"vector for {v.key} has {v.probs.size} classes, expected {n}")
            probs = " ".join(repr(float(p)) for p in v.probs)
            fh.write(f"{v.video} {v.frame} {v.box_index} {probs}\n")


def load_probs(path) -> list[ProbVector]:
    """Parse a probability file; distribution invariants are enforced per row."""
    vectors: list[ProbVector] = []
    n = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            parts = text.split()
            if n is None:
                if len(parts) != 2 or parts[0] != "NPROB":
                    raise ParseError("expected header 'NPROB <N>'", line=lineno)
                try:
                    n = int(parts[1])
                except ValueError as exc:
                    raise ParseError(str(exc), line=lineno) from exc
                if n < 2:
                    raise ParseError(f"N must be >= 2, got {n}", line=lineno)
                continue
            if len(parts) != 3 + n:
                raise ParseError(f"expected {3 + n} fields, got {len(parts)}", line=lineno)
            try:
                frame = int(parts[1])
                box_index = int(parts[2])
                probs = [float(p) for p in parts[3:]]
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            vectors.append(ProbVector(video=parts[0], frame=frame, box_index=box_index, probs=probs))
    if n is None:
        raise ParseError(f"{path}: missing 'NPROB <N>' header")
    return vectors


# -- run manifests ----------------------------------------------------------


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Everything needed to reproduce a run byte for byte.

    No timestamps on purpose: equal manifests must mean equal outputs.
    """

    command: str
    config: dict
    inputs: list[dict] = field(default_factory=list)
    tool: str = "trackforge"
    version: str = __version__

    def add_input(self, path) -> None:
        self.inputs.append({"path": str(path), "sha256": sha256_file(path)})

    def to_json(self) -> str:
        payload = {
            "tool": self.tool,
            "version": self.version,
            "command": self.command,
            "config": self.config,
            "inputs": self.inputs,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())
