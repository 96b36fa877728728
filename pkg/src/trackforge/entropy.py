"""Entropy-based objectness evaluation of proposals.

Dataset-independent: instead of comparing boxes against annotations, feed
each box to any N-class classifier and measure the Shannon entropy of the
output distribution. Confident, peaked outputs (low entropy) indicate
object-like content; spread-out outputs indicate background. The engine is
label-agnostic; per-class grouping is a reporting concern for the caller.

Probability wire format (UTF-8, LF-terminated): a header line ``NPROB <N>``,
then one record per line: video id, frame index, box index, and N
space-separated decimal floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySelection, InvalidDistribution
from .linking import Provenance, Track, TrackEntry

SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class ProbVector:
    """A classifier's output distribution for one box."""

    video: str
    frame: int
    box_index: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size < 2:
            raise InvalidDistribution("need a 1-D distribution over at least 2 classes")
        if np.any(p < 0.0) or not np.all(np.isfinite(p)):
            raise InvalidDistribution("probabilities must be finite and nonnegative")
        total = float(p.sum())
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InvalidDistribution(f"probabilities sum to {total}, expected 1 +- {SUM_TOLERANCE}")
        object.__setattr__(self, "probs", p)
        p.flags.writeable = False

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.video, self.frame, self.box_index)


def shannon_entropy(p, base: float | None = None) -> float:
    """H = -sum p_i log p_i, with 0 log 0 = 0; natural log unless ``base`` given.

    Bounded by [0, log N]: zero exactly for one-hot vectors, maximal at the
    uniform distribution.
    """
    probs = p.probs if isinstance(p, ProbVector) else np.asarray(p, dtype=np.float64)
    nz = probs[probs > 0.0]
    h = float(-(nz * np.log(nz)).sum())
    if base is not None:
        h /= math.log(base)
    return h


def track_representative(t: Track) -> TrackEntry:
    """The matched entry with the best proposal score; ties go to the earliest frame.

    This is the box submitted to the classifier when a whole track is judged
    by a single crop.
    """
    matched = [e for e in t.entries if e.provenance is Provenance.MATCHED]
    if not matched:
        raise ValueError(f"track {t.id} has no matched entries")
    return max(matched, key=lambda e: (e.box.score, -e.frame))


@dataclass(frozen=True)
class EntropyReport:
    """Per-item entropies plus their mean."""

    entropies: tuple[float, ...]
    keys: tuple[tuple[str, int, int], ...]
    mean: float
    count: int
    base: float | None = None

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "log_base": "e" if self.base is None else self.base,
            "items": [
                {"video": k[0], "frame": k[1], "box": k[2], "entropy": h}
                for k, h in zip(self.keys, self.entropies)
            ],
        }


def evaluate(selection: Sequence[ProbVector] | Iterable[ProbVector], base: float | None = None) -> EntropyReport:
    """Entropy of each selected vector and the mean over the selection."""
    vectors = list(selection)
    if not vectors:
        raise EmptySelection("no probability vectors to evaluate")
    entropies = tuple(shannon_entropy(v, base=base) for v in vectors)
    return EntropyReport(
        entropies=entropies,
        keys=tuple(v.key for v in vectors),
        mean=sum(entropies) / len(entropies),
        count=len(entropies),
        base=base,
    )
