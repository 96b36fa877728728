"""Synthetic scenes and brute-force oracles for desk-scale evaluation.

A scene plants moving rectangles (ground truth), optional static logo
boxes, per-frame jittered proposals, uniformly random decoy boxes, and
exact flow fields (the object's displacement inside its box, zero
elsewhere). Everything derives from a PCG64 stream, so a seed pins the
entire scene bit for bit across runs and platforms.

Also here: a temporal-IoU recall metric and a deliberately naive
re-implementation of the linking loop used for equivalence testing
against :func:`trackforge.linking.build_tracks`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .entropy import ProbVector
from .errors import MissingFlow
from .flow import FlowField
from .geometry import Box, iou
from .io import FrameProposals, normalize_scores
from .linking import BuilderConfig, Provenance, Track, TrackEntry


@dataclass(frozen=True)
class SceneObject:
    """A ground-truth rectangle moving with constant per-frame velocity."""

    x: float
    y: float
    w: float
    h: float
    vx: float = 0.0
    vy: float = 0.0

    def box_at(self, frame: int, score: float = 1.0) -> Box:
        return Box(x=self.x + frame * self.vx, y=self.y + frame * self.vy, w=self.w, h=self.h, score=score)


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    frames: int
    objects: tuple[SceneObject, ...] = ()
    logos: tuple[SceneObject, ...] = ()  # static by definition; velocities ignored
    decoys_per_frame: int = 0
    jitter: float = 0.0
    seed: int = 0
    video: str = "synth"

    @staticmethod
    def from_json(text: str) -> "SceneSpec":
        raw = json.loads(text)
        return SceneSpec(
            width=int(raw["width"]),
            height=int(raw["height"]),
            frames=int(raw["frames"]),
            objects=tuple(SceneObject(**o) for o in raw.get("objects", [])),
            logos=tuple(SceneObject(x=o["x"], y=o["y"], w=o["w"], h=o["h"]) for o in raw.get("logos", [])),
            decoys_per_frame=int(raw.get("decoys_per_frame", 0)),
            jitter=float(raw.get("jitter", 0.0)),
            seed=int(raw.get("seed", 0)),
            video=str(raw.get("video", "synth")),
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "width": self.width,
                "height": self.height,
                "frames": self.frames,
                "objects": [vars(o) for o in self.objects],
                "logos": [{"x": o.x, "y": o.y, "w": o.w, "h": o.h} for o in self.logos],
                "decoys_per_frame": self.decoys_per_frame,
                "jitter": self.jitter,
                "seed": self.seed,
                "video": self.video,
            },
            sort_keys=True,
            indent=2,
        )


@dataclass
class SceneData:
    proposals: list[FrameProposals]
    flows: dict[int, FlowField]
    gt_tracks: list[Track]
    # origin of each proposal box, keyed by (frame, box_index):
    # "object:<i>", "logo:<i>", or "decoy"
    origins: dict[tuple[int, int], str] = field(default_factory=dict)
    # raw records in generation order, ready for io.write_proposals
    records: list[tuple] = field(default_factory=list)


def _paint(grid_x, grid_y, box: Box, vx: float, vy: float, width: int, height: int) -> None:
    c0 = max(0, math.ceil(box.x - 0.5))
    c1 = min(width, math.ceil(box.x + box.w - 0.5))
    r0 = max(0, math.ceil(box.y - 0.5))
    r1 = min(height, math.ceil(box.y + box.h - 0.5))
    if c0 < c1 and r0 < r1:
        grid_x[r0:r1, c0:c1] = vx
        grid_y[r0:r1, c0:c1] = vy


def generate_scene(spec: SceneSpec) -> SceneData:
    """Render a scene spec into proposals, flow fields, and ground truth.

    Proposals are ground-truth boxes perturbed by uniform jitter (position
    within +-jitter*side, sides scaled by 1 +- jitter) plus logo boxes
    (exact: burned-in graphics are pixel-stable) plus uniformly random
    decoys. Objects score high, decoys low, so rank order has signal to
    find. Flow fields cover frame pairs 0 .. frames-2.
    """
    if spec.frames < 1:
        raise ValueError("a scene needs at least one frame")
    rng = np.random.Generator(np.random.PCG64(spec.seed))

    records = []  # (video, frame, x, y, w, h, raw_score)
    labels = []  # origin label per record, same order
    for f in range(spec.frames):
        for i, obj in enumerate(spec.objects):
            gt = obj.box_at(f)
            jx = float(rng.uniform(-spec.jitter * gt.w, spec.jitter * gt.w)) if spec.jitter else 0.0
            jy = float(rng.uniform(-spec.jitter * gt.h, spec.jitter * gt.h)) if spec.jitter else 0.0
            sw = float(rng.uniform(1.0 - spec.jitter, 1.0 + spec.jitter)) if spec.jitter else 1.0
            sh = float(rng.uniform(1.0 - spec.jitter, 1.0 + spec.jitter)) if spec.jitter else 1.0
            score = float(rng.uniform(0.7, 1.0))
            records.append((spec.video, f, gt.x + jx, gt.y + jy, gt.w * sw, gt.h * sh, score))
            labels.append(f"object:{i}")
        for i, logo in enumerate(spec.logos):
            score = float(rng.uniform(0.75, 1.0))
            records.append((spec.video, f, logo.x, logo.y, logo.w, logo.h, score))
            labels.append(f"logo:{i}")
        for _ in range(spec.decoys_per_frame):
            w = float(rng.uniform(4.0, max(5.0, spec.width / 3)))
            h = float(rng.uniform(4.0, max(5.0, spec.height / 3)))
            x = float(rng.uniform(0.0, spec.width - w))
            y = float(rng.uniform(0.0, spec.height - h))
            score = float(rng.uniform(0.0, 0.6))
            records.append((spec.video, f, x, y, w, h, score))
            labels.append("decoy")

    # Normalize and sort exactly the way load_proposals does, so the
    # in-memory scene and a written-then-loaded one are identical.
    proposals: list[FrameProposals] = []
    origins: dict[tuple[int, int], str] = {}
    if records:
        normalized, score_range = normalize_scores([r[6] for r in records])
        per_frame: dict[int, list] = {}
        for rec, label, score in zip(records, labels, normalized):
            box = Box(x=rec[2], y=rec[3], w=rec[4], h=rec[5], score=score)
            per_frame.setdefault(rec[1], []).append((box, label))
        for f in sorted(per_frame):
            ranked = sorted(per_frame[f], key=lambda pair: -pair[0].score)
            boxes = [b for b, _ in ranked]
            proposals.append(
                FrameProposals(video_id=spec.video, frame=f, boxes=boxes, raw_score_range=score_range)
            )
            for idx, (_, label) in enumerate(ranked):
                origins[(f, idx)] = label

    flows: dict[int, FlowField] = {}
    for f in range(spec.frames - 1):
        dx = np.zeros((spec.height, spec.width), dtype=np.float32)
        dy = np.zeros((spec.height, spec.width), dtype=np.float32)
        for obj in spec.objects:
            _paint(dx, dy, obj.box_at(f), obj.vx, obj.vy, spec.width, spec.height)
        flows[f] = FlowField(width=spec.width, height=spec.height, dx=dx, dy=dy, frame_index=f)

    gt_tracks = []
    for i, obj in enumerate(spec.objects):
        entries = [
            TrackEntry(frame=f, box=obj.box_at(f), provenance=Provenance.MATCHED)
            for f in range(spec.frames)
        ]
        gt_tracks.append(Track(id=i, video=spec.video, entries=entries, score_mean=1.0, iou_mean=1.0, rank=1.0))

    return SceneData(proposals=proposals, flows=flows, gt_tracks=gt_tracks, origins=origins, records=records)


def plant_probabilities(
    scene: SceneData,
    n_classes: int = 1000,
    peak: float = 0.9,
    seed: int = 0,
) -> list[ProbVector]:
    """Fabricate classifier outputs for every proposal box of a scene.

    Object boxes get a peaked distribution (mass ``peak`` on a class keyed
    by the object index), decoys and logos a jittered near-uniform one, so
    entropy separates them the way a real classifier would.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    vectors = []
    rest = (1.0 - peak) / (n_classes - 1)
    for fp in scene.proposals:
        for idx in range(len(fp.boxes)):
            label = scene.origins[(fp.frame, idx)]
            if label.startswith("object:"):
                probs = np.full(n_classes, rest, dtype=np.float64)
                probs[int(label.split(":")[1]) % n_classes] = peak
            else:
                probs = rng.uniform(0.9, 1.1, n_classes)
                probs /= probs.sum()
            vectors.append(ProbVector(video=fp.video_id, frame=fp.frame, box_index=idx, probs=probs))
    return vectors


def temporal_recall(predicted: Sequence[Track], gt_tracks: Sequence[Track], iou_thresh: float) -> float:
    """Fraction of ground-truth tracks covered by some predicted track.

    A prediction covers a ground-truth track when its mean per-frame IoU
    over the ground truth's frames exceeds ``iou_thresh``; frames where the
    prediction is inactive count as IoU 0.
    """
    if not gt_tracks:
        return 1.0
    covered = 0
    pred_maps = [{e.frame: e.box for e in p.entries} for p in predicted]
    for gt in gt_tracks:
        hit = False
        for pmap in pred_maps:
            total = 0.0
            for e in gt.entries:
                pbox = pmap.get(e.frame)
                if pbox is not None:
                    total += iou(e.box, pbox)
            if total / len(gt.entries) > iou_thresh:
                hit = True
                break
        if hit:
            covered += 1
    return covered / len(gt_tracks)


# -- naive reference builder -------------------------------------------------
#
# Everything below re-derives the linking loop from its contract in plain
# quadratic style, on purpose sharing no helper code with the production
# builder. Used to cross-check build_tracks on randomized small instances.


def _naive_iou(ax, ay, aw, ah, b: Box) -> float:
    ax2, ay2 = ax + aw, ay + ah
    bx1, by1, bx2, by2 = b.x, b.y, b.x + b.w, b.y + b.h
    iw = min(ax2, bx2) - max(ax, bx1)
    ih = min(ay2, by2) - max(ay, by1)
    inter = iw * ih if (iw > 0.0 and ih > 0.0) else 0.0
    union = (ax2 - ax) * (ay2 - ay) + (bx2 - bx1) * (by2 - by1) - inter
    return inter / union


def _naive_mean_offset(field: FlowField, b: Box) -> tuple[float, float]:
    c0 = max(0, math.ceil(b.x - 0.5))
    c1 = min(field.width, math.ceil(b.x + b.w - 0.5))
    r0 = max(0, math.ceil(b.y - 0.5))
    r1 = min(field.height, math.ceil(b.y + b.h - 0.5))
    sum_x = 0.0
    sum_y = 0.0
    count = 0
    for r in range(r0, r1):
        for c in range(c0, c1):
            sum_x += float(field.dx[r, c])
            sum_y += float(field.dy[r, c])
            count += 1
    if count == 0:
        return 0.0, 0.0
    return sum_x / count, sum_y / count


def oracle_build_tracks(frames, flows, cfg: BuilderConfig = BuilderConfig()) -> list[Track]:
    """Contract twin of :func:`trackforge.linking.build_tracks`."""
    if not frames:
        raise ValueError("frames must be nonempty")
    video = frames[0].video_id
    tracks = []  # {"id", "rows": [(frame, Box, match_iou, box_index)], "ttl", "ref", "dead"}
    next_id = 0

    def seed(fp, used):
        nonlocal next_id
        for j, box in enumerate(fp.boxes[: cfg.top_k]):
            if used is not None and used[j]:
                continue
            tracks.append({"id": next_id, "rows": [(fp.frame, box, None, j)], "ttl": cfg.ttl, "ref": box, "dead": False})
            next_id += 1

    seed(frames[0], None)
    for i in range(len(frames) - 1):
        cur, nxt = frames[i], frames[i + 1]
        field = None
        if flows is not None:
            field = flows.get(cur.frame)
            if field is None:
                raise MissingFlow(cur.frame)
        cands = nxt.boxes[: cfg.top_k]
        used = [False] * len(cands)
        for tr in tracks:
            if tr["dead"]:
                continue
            ref = tr["ref"]
            if field is None:
                sx, sy = ref.x, ref.y
            else:
                ox, oy = _naive_mean_offset(field, ref)
                sx, sy = ref.x + ox, ref.y + oy
            best_j = -1
            best_v = 0.0
            for j, cand in enumerate(cands):
                if used[j]:
                    continue
                v = _naive_iou(sx, sy, ref.w, ref.h, cand)
                if v > best_v:
                    best_v = v
                    best_j = j
            if best_j >= 0 and best_v > cfg.iou_thresh:
                used[best_j] = True
                tr["rows"].append((nxt.frame, cands[best_j], best_v, best_j))
                tr["ttl"] = min(tr["ttl"] + 1, cfg.ttl)
                tr["ref"] = cands[best_j]
            else:
                tr["ttl"] -= 1
                tr["ref"] = Box(x=sx, y=sy, w=ref.w, h=ref.h, score=ref.score)
                if tr["ttl"] == 0:
                    tr["dead"] = True
        seed(nxt, used)

    out = []
    for tr in tracks:
        rows = tr["rows"]
        entries = []
        for k, (f, box, miou, j) in enumerate(rows):
            if k > 0:
                pf, pbox, _, _ = rows[k - 1]
                span = f - pf
                for g in range(pf + 1, f):
                    t = (g - pf) / span
                    entries.append(
                        TrackEntry(
                            frame=g,
                            box=Box(
                                x=pbox.x + (box.x - pbox.x) * t,
                                y=pbox.y + (box.y - pbox.y) * t,
                                w=pbox.w + (box.w - pbox.w) * t,
                                h=pbox.h + (box.h - pbox.h) * t,
                                score=0.0,
                            ),
                            provenance=Provenance.INTERPOLATED,
                        )
                    )
            entries.append(
                TrackEntry(frame=f, box=box, provenance=Provenance.MATCHED, match_iou=miou, box_index=j)
            )
        scores = [e.box.score for e in entries if e.provenance is Provenance.MATCHED]
        ious = [e.match_iou for e in entries if e.match_iou is not None]
        out.append(
            Track(
                id=tr["id"],
                video=video,
                entries=entries,
                score_mean=sum(scores) / len(scores),
                iou_mean=sum(ious) / len(ious) if ious else 0.0,
            )
        )
    out.sort(key=lambda t: t.id)
    return out
