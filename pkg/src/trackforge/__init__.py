"""Spatio-temporal object proposals from per-frame boxes and optical flow.

Links any frame-wise proposal's boxes into ranked tracks using only box
geometry and flow (no appearance features), suppresses redundant, short,
and static tracks, and evaluates proposal quality via the entropy of a
classifier's output distribution.
"""

from .entropy import EntropyReport, ProbVector, evaluate, shannon_entropy, track_representative
from .flow import FlowDir, FlowField, estimate_flow, mean_magnitude, mean_offset, read_flow, shift, write_flow
from .geometry import Box, iou, viou
from .io import FrameProposals, RunManifest, load_probs, load_proposals, load_tracks, write_probs, write_proposals, write_tracks
from .linking import BuilderConfig, Provenance, Track, TrackEntry, build_tracks, interpolate_gap
from .pipeline import process_video
from .ranking import rank_tracks, score_track
from .suppression import SuppressionConfig, filter_short, filter_static, temporal_nms
from .synth import SceneObject, SceneSpec, generate_scene, oracle_build_tracks, plant_probabilities, temporal_recall
from .version import __version__

__all__ = [
    "Box",
    "BuilderConfig",
    "EntropyReport",
    "FlowDir",
    "FlowField",
    "FrameProposals",
    "ProbVector",
    "Provenance",
    "RunManifest",
    "SceneObject",
    "SceneSpec",
    "SuppressionConfig",
    "Track",
    "TrackEntry",
    "__version__",
    "build_tracks",
    "estimate_flow",
    "evaluate",
    "filter_short",
    "filter_static",
    "generate_scene",
    "interpolate_gap",
    "iou",
    "load_probs",
    "load_proposals",
    "load_tracks",
    "mean_magnitude",
    "mean_offset",
    "oracle_build_tracks",
    "plant_probabilities",
    "process_video",
    "rank_tracks",
    "read_flow",
    "score_track",
    "shannon_entropy",
    "shift",
    "temporal_nms",
    "temporal_recall",
    "track_representative",
    "viou",
    "write_flow",
    "write_probs",
    "write_proposals",
    "write_tracks",
]
