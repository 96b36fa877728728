"""Command-line front door.

Subcommands mirror the pipeline stages so each one is independently
exercisable: ``synth`` (scene generation), ``build`` (proposals -> ranked
tracks), ``rank`` and ``nms`` (standalone re-scoring / suppression),
``eval-entropy`` (objectness report), and ``render`` (overlay pixmaps).

Exit codes: 0 success, 2 malformed inputs, 3 missing flow, 4 missing
probability records. Every command that writes an output also writes a
``<output>.manifest.json`` recording config and input hashes; rerunning
with an equal manifest reproduces the outputs byte for byte. The env var
``TRACKFORGE_SEED`` overrides the synth seed.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys

from . import io as tfio
from .entropy import track_representative
from .errors import InvalidDistribution, MissingFlow, ParseError, TrackforgeError
from .flow import FLOW_FILE_PATTERN, FlowDir, write_flow
from .linking import BuilderConfig
from .pipeline import process_video
from .ranking import rank_tracks
from .render import render_tracks
from .suppression import SuppressionConfig, temporal_nms
from .synth import SceneSpec, generate_scene
from .version import __version__


class _MissingRecords(TrackforgeError):
    pass


def _hash_flow_dir(path) -> dict:
    import hashlib

    digest = hashlib.sha256()
    for name in sorted(os.listdir(path)):
        if name.endswith(".tflo"):
            digest.update(name.encode())
            digest.update(bytes.fromhex(tfio.sha256_file(os.path.join(path, name))))
    return {"path": str(path), "sha256": digest.hexdigest()}


def _flow_source_for(video: str, flow_dir: str | None):
    if flow_dir is None:
        return None
    per_video = os.path.join(flow_dir, video)
    return FlowDir(per_video if os.path.isdir(per_video) else flow_dir)


def _build_one(payload):
    frames, flow_dir, link_cfg, supp_cfg, weight = payload
    flows = _flow_source_for(frames[0].video_id, flow_dir)
    return process_video(frames, flows, link_cfg, supp_cfg, weight)


def _cmd_build(args) -> int:
    link_cfg = BuilderConfig(iou_thresh=args.iou_thresh, ttl=args.ttl, top_k=args.top_k)
    supp_cfg = SuppressionConfig(
        nms_viou=args.nms, min_length=args.min_length, static_thresh=args.static_thresh
    )
    frames = tfio.load_proposals(args.proposals, top_k=args.top_k)
    videos = tfio.group_by_video(frames)
    flow_dir = None if args.zero_flow else args.flow_dir

    jobs = [(seq, flow_dir, link_cfg, supp_cfg, args.weight) for seq in videos.values()]
    if args.jobs > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_build_one, jobs))
    else:
        results = [_build_one(job) for job in jobs]

    tracks = [t for video_tracks in results for t in video_tracks]
    tfio.write_tracks(tracks, args.output)

    manifest = tfio.RunManifest(
        command="build",
        config={
            "iou_thresh": args.iou_thresh,
            "ttl": args.ttl,
            "top_k": args.top_k,
            "min_length": args.min_length,
            "static_thresh": args.static_thresh,
            "nms_viou": args.nms,
            "lambda": args.weight,
            "zero_flow": bool(args.zero_flow),
        },
    )
    manifest.add_input(args.proposals)
    if flow_dir is not None and os.path.isdir(flow_dir):
        manifest.inputs.append(_hash_flow_dir(flow_dir))
    manifest.write(args.output + ".manifest.json")
    print(f"wrote {len(tracks)} tracks to {args.output}")
    return 0


def _cmd_synth(args) -> int:
    with open(args.scene, "r", encoding="utf-8") as fh:
        spec = SceneSpec.from_json(fh.read())
    seed = spec.seed
    if args.seed is not None:
        seed = args.seed
    env_seed = os.environ.get("TRACKFORGE_SEED")
    if env_seed is not None:
        seed = int(env_seed)
    if seed != spec.seed:
        spec = SceneSpec(**{**vars(spec), "seed": seed})

    scene = generate_scene(spec)
    os.makedirs(args.out, exist_ok=True)
    proposals_path = os.path.join(args.out, "proposals.txt")
    tfio.write_proposals(scene.records, proposals_path)
    flow_dir = os.path.join(args.out, "flow")
    os.makedirs(flow_dir, exist_ok=True)
    for index, field in sorted(scene.flows.items()):
        write_flow(field, os.path.join(flow_dir, FLOW_FILE_PATTERN % index))
    gt_path = os.path.join(args.out, "gt_tracks.jsonl")
    tfio.write_tracks(scene.gt_tracks, gt_path)

    manifest = tfio.RunManifest(command="synth", config=json.loads(spec.to_json()))
    manifest.add_input(args.scene)
    manifest.write(os.path.join(args.out, "synth.manifest.json"))
    print(f"wrote scene to {args.out} (seed {seed})")
    return 0


def _ranked_order(tracks):
    return sorted(tracks, key=lambda t: (-t.rank, -len(t.entries), t.id))


def _cmd_eval_entropy(args) -> int:
    tracks = tfio.load_tracks(args.tracks)
    vectors = {v.key: v for v in tfio.load_probs(args.probs)}

    by_video: dict[str, list] = {}
    for t in tracks:
        by_video.setdefault(t.video, []).append(t)

    selected = []
    short_videos = []
    missing = []
    for video, group in by_video.items():
        top = _ranked_order(group)[: args.top]
        if len(top) < args.top:
            short_videos.append((video, len(top)))
        for t in top:
            rep = track_representative(t)
            key = (video, rep.frame, rep.box_index if rep.box_index is not None else -1)
            if key not in vectors:
                missing.append((t.id,) + key)
            else:
                selected.append(vectors[key])
    if missing:
        for tid, video, frame, idx in missing:
            print(f"error: no probability record for track {tid} ({video} frame {frame} box {idx})", file=sys.stderr)
        return 4
    for video, count in short_videos:
        print(f"warning: video {video!r} has only {count} tracks, evaluating all of them", file=sys.stderr)

    from .entropy import evaluate

    report = evaluate(selected, base=args.base)
    payload = report.to_dict()
    payload["videos"] = {}
    for item in payload["items"]:
        agg = payload["videos"].setdefault(item["video"], {"count": 0, "total": 0.0})
        agg["count"] += 1
        agg["total"] += item["entropy"]
    payload["videos"] = {
        v: {"count": agg["count"], "mean": agg["total"] / agg["count"]}
        for v, agg in payload["videos"].items()
    }
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        manifest = tfio.RunManifest(
            command="eval-entropy", config={"top": args.top, "log_base": "e" if args.base is None else args.base}
        )
        manifest.add_input(args.tracks)
        manifest.add_input(args.probs)
        manifest.write(args.output + ".manifest.json")
    else:
        sys.stdout.write(text)
    print(f"mean entropy {report.mean:.6f} over {report.count} boxes", file=sys.stderr)
    return 0


def _cmd_rank(args) -> int:
    tracks = tfio.load_tracks(args.tracks)
    by_video: dict[str, list] = {}
    for t in tracks:
        by_video.setdefault(t.video, []).append(t)
    ranked = [t for group in by_video.values() for t in rank_tracks(group, args.weight)]
    tfio.write_tracks(ranked, args.output)
    manifest = tfio.RunManifest(command="rank", config={"lambda": args.weight})
    manifest.add_input(args.tracks)
    manifest.write(args.output + ".manifest.json")
    return 0


def _cmd_nms(args) -> int:
    tracks = tfio.load_tracks(args.tracks)
    by_video: dict[str, list] = {}
    for t in tracks:
        by_video.setdefault(t.video, []).append(t)
    kept = [t for group in by_video.values() for t in temporal_nms(group, args.nms)]
    tfio.write_tracks(kept, args.output)
    manifest = tfio.RunManifest(command="nms", config={"nms_viou": args.nms})
    manifest.add_input(args.tracks)
    manifest.write(args.output + ".manifest.json")
    return 0


def _cmd_render(args) -> int:
    tracks = tfio.load_tracks(args.tracks)
    canvas = (320, 240)
    if args.canvas:
        w, _, h = args.canvas.partition("x")
        canvas = (int(w), int(h))
    paths = render_tracks(
        tracks,
        args.out_dir,
        frames_dir=args.frames_dir,
        canvas=canvas,
        n_frames=args.frames,
    )
    print(f"wrote {len(paths)} frames to {args.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trackforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"trackforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="link proposals into ranked tracks")
    p.add_argument("proposals", help="proposals text file")
    p.add_argument("-o", "--output", required=True, help="output tracks file (JSON lines)")
    flow_group = p.add_mutually_exclusive_group(required=True)
    flow_group.add_argument("--flow-dir", help="directory of %%06d.tflo files (per video subdirs allowed)")
    flow_group.add_argument("--zero-flow", action="store_true", help="disable motion compensation")
    p.add_argument("--iou-thresh", type=float, default=0.5, help="match threshold (default 0.5)")
    p.add_argument("--ttl", type=int, default=5, help="initial/max time-to-live (default 5)")
    p.add_argument("--top-k", type=int, default=25, help="proposals kept per frame (default 25)")
    p.add_argument("--min-length", type=int, default=10, help="minimum track length (default 10)")
    p.add_argument("--static-thresh", type=float, default=1.0, help="static filter px/frame (default 1.0)")
    p.add_argument("--lambda", dest="weight", type=float, default=0.5, help="rank weighting factor (default 0.5)")
    p.add_argument("--nms", type=float, default=0.5, help="volume IoU suppression threshold (default 0.5)")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers across videos")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("synth", help="generate a synthetic scene")
    p.add_argument("--scene", required=True, help="scene spec JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the scene seed")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("eval-entropy", help="entropy report over top-ranked track representatives")
    p.add_argument("tracks", help="tracks file")
    p.add_argument("probs", help="probability file (NPROB format)")
    p.add_argument("--top", type=int, default=25, help="tracks per video to evaluate (default 25)")
    p.add_argument("--base", type=float, default=None, help="log base (default: natural)")
    p.add_argument("-o", "--output", default=None, help="report JSON path (default stdout)")
    p.set_defaults(func=_cmd_eval_entropy)

    p = sub.add_parser("rank", help="re-score and order a tracks file")
    p.add_argument("tracks")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--lambda", dest="weight", type=float, default=0.5)
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("nms", help="temporal NMS over a tracks file")
    p.add_argument("tracks")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--nms", type=float, default=0.5)
    p.set_defaults(func=_cmd_nms)

    p = sub.add_parser("render", help="write per-frame overlay pixmaps")
    p.add_argument("tracks")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--frames-dir", default=None, help="background P5/P6 images, sorted by name")
    p.add_argument("--canvas", default=None, help="blank canvas size WxH (default 320x240)")
    p.add_argument("--frames", type=int, default=None, help="frame count for blank canvases")
    p.set_defaults(func=_cmd_render)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MissingFlow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _MissingRecords as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ParseError, InvalidDistribution, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, NotADirectoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
