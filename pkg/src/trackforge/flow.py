"""Dense optical-flow fields and per-box displacement statistics.

A flow field maps frame ``i`` to frame ``i + 1``. Boxes are sampled at
pixel centers: pixel ``(px, py)`` belongs to a box when its center
``(px + 0.5, py + 0.5)`` lies inside ``[x, x + w) x [y, y + h)``, which is
unambiguous for fractional boxes. Boxes reaching past the field are
clipped rather than rejected, since proposals at frame borders are common.

The binary file format (one field per frame pair, little-endian):
magic ``TFLO``, u32 version=1, u32 frame_index, u32 width, u32 height,
then width*height pairs of float32 ``(dx, dy)`` in row-major order.
Directory convention: ``flow/%06d.tflo``.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptySupport, ParseError
from .geometry import Box

_MAGIC = b"TFLO"
_VERSION = 1
FLOW_FILE_PATTERN = "%06d.tflo"


@dataclass(frozen=True)
class FlowField:
    """Per-pixel displacement grids for one frame pair (immutable after load)."""

    width: int
    height: int
    dx: np.ndarray
    dy: np.ndarray
    frame_index: int

    def __post_init__(self):
        for name, grid in (("dx", self.dx), ("dy", self.dy)):
            if grid.shape != (self.height, self.width):
                raise DimensionMismatch(
                    f"{name} grid has shape {grid.shape}, expected {(self.height, self.width)}"
                )
            if not np.all(np.isfinite(grid)):
                raise ValueError(f"{name} grid contains non-finite displacements")
            grid.flags.writeable = False


def constant_field(width: int, height: int, dx: float, dy: float, frame_index: int = 0) -> FlowField:
    """Field with the same displacement at every pixel (dx/dy stored as float32)."""
    return FlowField(
        width=width,
        height=height,
        dx=np.full((height, width), dx, dtype=np.float32),
        dy=np.full((height, width), dy, dtype=np.float32),
        frame_index=frame_index,
    )


def _pixel_span(lo: float, size: float, limit: int) -> range:
    # centers p + 0.5 inside [lo, lo + size): p >= lo - 0.5 and p < lo + size - 0.5
    start = max(0, math.ceil(lo - 0.5))
    stop = min(limit, math.ceil(lo + size - 0.5))
    return range(start, stop)


def _box_slices(field: FlowField, b: Box):
    cols = _pixel_span(b.x, b.w, field.width)
    rows = _pixel_span(b.y, b.h, field.height)
    if len(cols) == 0 or len(rows) == 0:
        raise EmptySupport(f"box {(b.x, b.y, b.w, b.h)} covers no pixel centers in a {field.width}x{field.height} field")
    return slice(rows.start, rows.stop), slice(cols.start, cols.stop)


def mean_offset(field: FlowField, b: Box) -> tuple[float, float]:
    """Arithmetic mean of (dx, dy) over pixel centers inside the clipped box."""
    rows, cols = _box_slices(field, b)
    mx = float(np.mean(field.dx[rows, cols], dtype=np.float64))
    my = float(np.mean(field.dy[rows, cols], dtype=np.float64))
    return mx, my


def mean_magnitude(field: FlowField, b: Box) -> float:
    """Mean of sqrt(dx^2 + dy^2) over pixel centers inside the clipped box."""
    rows, cols = _box_slices(field, b)
    dx = field.dx[rows, cols].astype(np.float64)
    dy = field.dy[rows, cols].astype(np.float64)
    return float(np.mean(np.hypot(dx, dy)))


def shift(b: Box, dx: float, dy: float) -> Box:
    """Translate a box; shifted boxes are used for matching only, never stored."""
    return Box(x=b.x + dx, y=b.y + dy, w=b.w, h=b.h, score=b.score)


def estimate_flow(
    frame_a: np.ndarray,
    frame_b: np.ndarray,
    block: int = 8,
    radius: int = 4,
    frame_index: int = 0,
) -> FlowField:
    """Block-matching fallback estimator (sum of absolute differences).

    For each ``block x block`` tile of ``frame_a`` the integer displacement
    within ``+-radius`` minimizing the SAD against ``frame_b`` is chosen and
    replicated per-pixel within the tile. Candidate displacements whose
    shifted window leaves the frame are skipped; (0, 0) is always valid.
    Ties break by smallest displacement magnitude, then lexicographic
    (dx, dy). Real deployments ingest precomputed flow; this exists so the
    pipeline runs without one.
    """
    a = np.asarray(frame_a, dtype=np.float64)
    b = np.asarray(frame_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionMismatch("frames must be 2-D grayscale grids")
    if a.shape != b.shape:
        raise DimensionMismatch(f"frame shapes differ: {a.shape} vs {b.shape}")
    if block < 1:
        raise ValueError("block must be >= 1")
    if radius < 0:
        raise ValueError("radius must be >= 0")

    h, w = a.shape
    candidates = sorted(
        ((dx, dy) for dx in range(-radius, radius + 1) for dy in range(-radius, radius + 1)),
        key=lambda d: (d[0] * d[0] + d[1] * d[1], d[0], d[1]),
    )
    out_dx = np.zeros((h, w), dtype=np.float32)
    out_dy = np.zeros((h, w), dtype=np.float32)
    for by in range(0, h, block):
        for bx in range(0, w, block):
            y1, x1 = min(by + block, h), min(bx + block, w)
            tile = a[by:y1, bx:x1]
            best = (0, 0)
            best_sad = None
            for dx, dy in candidates:
                ty0, ty1 = by + dy, y1 + dy
                tx0, tx1 = bx + dx, x1 + dx
                if ty0 < 0 or tx0 < 0 or ty1 > h or tx1 > w:
                    continue
                sad = float(np.abs(tile - b[ty0:ty1, tx0:tx1]).sum())
                if best_sad is None or sad < best_sad:
                    best_sad = sad
                    best = (dx, dy)
            out_dx[by:y1, bx:x1] = best[0]
            out_dy[by:y1, bx:x1] = best[1]
    return FlowField(width=w, height=h, dx=out_dx, dy=out_dy, frame_index=frame_index)


def write_flow(field: FlowField, path) -> None:
    """Serialize one field in the TFLO binary format."""
    data = np.empty((field.height, field.width, 2), dtype="<f4")
    data[..., 0] = field.dx
    data[..., 1] = field.dy
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<III", _VERSION, field.frame_index, field.width))
        fh.write(struct.pack("<I", field.height))
        fh.write(data.tobytes())


def read_flow(path) -> FlowField:
    """Load one TFLO file."""
    with open(path, "rb") as fh:
        header = fh.read(20)
        if len(header) < 20 or header[:4] != _MAGIC:
            raise ParseError(f"{path}: not a TFLO file")
        version, frame_index, width, height = struct.unpack("<IIII", header[4:])
        if version != _VERSION:
            raise ParseError(f"{path}: unsupported TFLO version {version}")
        payload = fh.read(width * height * 8)
        if len(payload) != width * height * 8:
            raise ParseError(f"{path}: truncated TFLO payload")
    data = np.frombuffer(payload, dtype="<f4").reshape(height, width, 2)
    return FlowField(
        width=width,
        height=height,
        dx=np.ascontiguousarray(data[..., 0]),
        dy=np.ascontiguousarray(data[..., 1]),
        frame_index=frame_index,
    )


class FlowDir:
    """Lazy provider over a directory of ``%06d.tflo`` files; caches loads."""

    def __init__(self, path):
        self.path = str(path)
        self._cache: dict[int, FlowField] = {}

    def get(self, frame_index: int) -> FlowField | None:
        if frame_index in self._cache:
            return self._cache[frame_index]
        path = os.path.join(self.path, FLOW_FILE_PATTERN % frame_index)
        if not os.path.isfile(path):
            return None
        field = read_flow(path)
        self._cache[frame_index] = field
        return field


class ClampedFlows:
    """View of a provider that clamps lookups to a last valid frame pair.

    A video of N frames has N - 1 flow fields, so statistics sampled at the
    final frame (e.g. the static-content filter) reuse the last incoming
    field instead of failing.
    """

    def __init__(self, flows, max_index: int):
        self.flows = flows
        self.max_index = max_index

    def get(self, frame_index: int) -> FlowField | None:
        return self.flows.get(min(frame_index, self.max_index))


def by_frame(fields) -> dict[int, FlowField]:
    """Index an iterable of fields by their frame_index."""
    return {f.frame_index: f for f in fields}
