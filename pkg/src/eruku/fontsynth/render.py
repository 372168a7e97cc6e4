"""Rasterize text strings with a GlyphFont into fixed-height images.

Images are 8-bit grayscale, white background, dark ink.  Widths are
rounded up to a multiple of the latent downsample factor so every image
maps onto a whole number of latent columns.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from ..errors import InvalidInput, UnsupportedGlyph
from ..kernels import raster_segments
from ..rngutil import make_rng
from .fonts import GlyphFont

LATENT_F = 8  # image pixels per latent column
MARGIN = 4.0  # white border, px
AA = 1.0  # anti-aliasing ramp width, px

_JITTER_STREAM = 0x52454E44


@dataclass
class TextImage:
    pixels: np.ndarray  # (H, W) uint8
    height_px: int
    width_px: int


def _layout(font: GlyphFont, text: str, rng, height_px: int, rot_deg: float, shear: float):
    """Place glyph strokes in pixel space; returns (segments, pen_advance_px).

    Rotation is applied per word about the word's own center so long
    lines stay inside the fixed-height canvas; shear is global about the
    baseline.
    """
    scale = 0.58 * height_px
    base_y = 0.76 * height_px
    pen = 0.0
    pts_a: list[tuple[float, float]] = []
    pts_b: list[tuple[float, float]] = []
    word_ranges: list[tuple[int, int]] = []
    word_start = 0
    for idx, ch in enumerate(text):
        if not font.supports(ch):
            raise UnsupportedGlyph(f"no glyph for {ch!r} (U+{ord(ch):04X})")
        if ch == " " and len(pts_a) > word_start:
            word_ranges.append((word_start, len(pts_a)))
            word_start = len(pts_a)
        jitter = rng.uniform(-font.baseline_jitter, font.baseline_jitter)
        x0 = MARGIN + pen
        for poly in font.strokes[ch]:
            px = x0 + poly[:, 0] * scale
            py = base_y - poly[:, 1] * scale + jitter
            for k in range(len(poly) - 1):
                pts_a.append((px[k], py[k]))
                pts_b.append((px[k + 1], py[k + 1]))
            if len(poly) == 1:
                pts_a.append((px[0], py[0]))
                pts_b.append((px[0], py[0]))
        pen += font.advances[ch] * scale
        if idx + 1 < len(text):
            pen += font.spacing
    if len(pts_a) > word_start:
        word_ranges.append((word_start, len(pts_a)))

    if not pts_a:
        return np.zeros((0, 5), dtype=np.float64), pen

    a = np.asarray(pts_a, dtype=np.float64)
    b = np.asarray(pts_b, dtype=np.float64)
    if rot_deg != 0.0:
        th = math.radians(rot_deg)
        c, s = math.cos(th), math.sin(th)
        for lo, hi in word_ranges:
            allp = np.concatenate([a[lo:hi], b[lo:hi]], axis=0)
            ctr = (allp.min(axis=0) + allp.max(axis=0)) / 2
            for arr in (a, b):
                d = arr[lo:hi] - ctr
                arr[lo:hi, 0] = ctr[0] + c * d[:, 0] - s * d[:, 1]
                arr[lo:hi, 1] = ctr[1] + s * d[:, 0] + c * d[:, 1]
    if shear != 0.0:
        a[:, 0] += shear * (base_y - a[:, 1])
        b[:, 0] += shear * (base_y - b[:, 1])

    segs = np.empty((len(a), 5), dtype=np.float64)
    segs[:, 0:2] = a
    segs[:, 2:4] = b
    segs[:, 4] = font.stroke_width / 2
    return segs, pen


def _canvas_width(segs: np.ndarray, pen: float, radius: float) -> int:
    raw = MARGIN + pen + MARGIN
    if segs.shape[0]:
        reach = float(max(segs[:, 0].max(), segs[:, 2].max())) + radius + AA / 2 + 1.0
        raw = max(raw, reach + MARGIN)
    return max(LATENT_F, int(math.ceil(raw / LATENT_F)) * LATENT_F)


def render_text_transformed(
    font: GlyphFont,
    text: str,
    seed: int,
    height_px: int = 64,
    rot_deg: float = 0.0,
    shear: float = 0.0,
) -> TextImage:
    """Render with an explicit mild affine (used for dataset augmentation)."""
    if not text:
        raise InvalidInput("text must be non-empty")
    rng = make_rng(seed, font.font_id, _JITTER_STREAM)
    segs, pen = _layout(font, text, rng, height_px, rot_deg, shear)
    width = _canvas_width(segs, pen, font.stroke_width / 2)
    cov = raster_segments(height_px, width, segs, AA)
    pixels = np.rint(255.0 * (1.0 - font.darkness * cov.astype(np.float64))).astype(np.uint8)
    return TextImage(pixels=pixels, height_px=height_px, width_px=width)


def render_text(font: GlyphFont, text: str, seed: int, height_px: int = 64) -> TextImage:
    """Deterministic plain rendering of ``text`` (no augmentation)."""
    return render_text_transformed(font, text, seed, height_px)


def stroke_width_stats(pixels: np.ndarray, threshold: int = 160, run_cap: int = 8) -> float:
    """Mean ink run length across rows and columns; 0 when no ink.

    Runs along the stroke direction are long and say nothing about
    thickness, so runs above ``run_cap`` are dropped and the mean of the
    remaining cross-section runs tracks the nominal stroke width.
    """
    ink = pixels < threshold
    runs: list[int] = []
    for mat in (ink, ink.T):
        for row in mat:
            n = 0
            for v in row:
                if v:
                    n += 1
                elif n:
                    if n <= run_cap:
                        runs.append(n)
                    n = 0
            if n and n <= run_cap:
                runs.append(n)
    if not runs:
        return 0.0
    return float(np.mean(np.asarray(runs, dtype=np.float64)))
