"""Static visual overlays: per-frame portable pixmaps with track-colored boxes.

Colors are keyed by track id through a fixed palette, so re-rendering the
same tracks yields byte-identical images. Input frames, when supplied, must
be binary portable pixmaps/graymaps (P6/P5); without frames a blank canvas
is used.
"""

from __future__ import annotations

import os
import re
from typing import Sequence

import numpy as np

from .errors import ParseError
from .linking import Track

PALETTE = (
    (230, 25, 75),
    (60, 180, 75),
    (255, 225, 25),
    (0, 130, 200),
    (245, 130, 48),
    (145, 30, 180),
    (70, 240, 240),
    (240, 50, 230),
    (210, 245, 60),
    (0, 128, 128),
    (220, 190, 255),
    (170, 110, 40),
)


def color_for(track_id: int) -> tuple[int, int, int]:
    return PALETTE[track_id % len(PALETTE)]


def write_ppm(image: np.ndarray, path) -> None:
    """Write an HxWx3 uint8 array as a binary PPM (P6)."""
    h, w = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(image, dtype=np.uint8).tobytes())


def read_pnm(path) -> np.ndarray:
    """Read a binary PPM (P6) or PGM (P5) into an HxWx3 uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    match = re.match(rb"(P[56])\s+(?:#[^\n]*\n\s*)*(\d+)\s+(\d+)\s+(\d+)\s", data)
    if not match:
        raise ParseError(f"{path}: not a binary PPM/PGM file")
    kind, w, h, maxval = match.group(1), int(match.group(2)), int(match.group(3)), int(match.group(4))
    if maxval != 255:
        raise ParseError(f"{path}: only maxval 255 is supported")
    channels = 3 if kind == b"P6" else 1
    pixels = np.frombuffer(data, dtype=np.uint8, count=w * h * channels, offset=match.end())
    if pixels.size != w * h * channels:
        raise ParseError(f"{path}: truncated pixel data")
    image = pixels.reshape(h, w, channels)
    if channels == 1:
        image = np.repeat(image, 3, axis=2)
    return image.copy()


def draw_box(image: np.ndarray, box, color, thickness: int = 2) -> None:
    """Draw a clipped rectangle outline in place."""
    h, w = image.shape[:2]
    x0, y0 = int(round(box.x)), int(round(box.y))
    x1, y1 = int(round(box.x + box.w)), int(round(box.y + box.h))
    for t in range(thickness):
        for yy in (y0 + t, y1 - 1 - t):
            if 0 <= yy < h:
                image[yy, max(0, x0) : min(w, x1)] = color
        for xx in (x0 + t, x1 - 1 - t):
            if 0 <= xx < w:
                image[max(0, y0) : min(h, y1), xx] = color


def render_tracks(
    tracks: Sequence[Track],
    out_dir,
    frames_dir=None,
    canvas: tuple[int, int] = (320, 240),
    n_frames: int | None = None,
) -> list[str]:
    """Write one overlay image per frame; returns the output paths.

    With ``frames_dir``, every P5/P6 file there (sorted by name) becomes one
    background frame. Otherwise blank canvases are used, covering frames
    0 .. n_frames-1 (default: through the last frame any track touches).
    """
    os.makedirs(out_dir, exist_ok=True)
    by_frame: dict[int, list[Track]] = {}
    for t in tracks:
        for e in t.entries:
            by_frame.setdefault(e.frame, []).append(t)

    if frames_dir is not None:
        names = sorted(f for f in os.listdir(frames_dir) if f.endswith((".ppm", ".pgm")))
        backgrounds = [read_pnm(os.path.join(frames_dir, name)) for name in names]
    else:
        if n_frames is None:
            n_frames = (max(by_frame) + 1) if by_frame else 1
        w, h = canvas
        backgrounds = [np.zeros((h, w, 3), dtype=np.uint8) for _ in range(n_frames)]

    paths = []
    for frame, image in enumerate(backgrounds):
        for t in by_frame.get(frame, ()):
            entry = next(e for e in t.entries if e.frame == frame)
            draw_box(image, entry.box, color_for(t.id))
        path = os.path.join(out_dir, "%06d.ppm" % frame)
        write_ppm(image, path)
        paths.append(path)
    return paths
