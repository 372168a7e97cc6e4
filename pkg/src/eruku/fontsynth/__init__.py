"""Procedural synthetic text-image dataset generation.

Glyphs are authored once as polyline stroke skeletons; a font is a
deterministic perturbation of those skeletons (slant, warp, stroke
width, spacing, jitter, ink darkness) derived from its integer id, so
arbitrarily many distinct "writers" exist without any font assets.
"""

from .fonts import GlyphFont, make_font
from .render import TextImage, render_text, stroke_width_stats
from .dataset import (
    DatasetConfig,
    SamplePair,
    generate_dataset,
    load_manifest,
    synth_sample,
)

__all__ = [
    "GlyphFont",
    "make_font",
    "TextImage",
    "render_text",
    "stroke_width_stats",
    "DatasetConfig",
    "SamplePair",
    "generate_dataset",
    "load_manifest",
    "synth_sample",
]
