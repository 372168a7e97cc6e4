"""Sample synthesis and on-disk dataset generation.

A dataset is a directory of PNG pairs plus a JSONL manifest whose first
line is a header record.  Per-sample seeds are derived from (seed,
index), so generation is order independent and re-runs are byte
identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import ErukuError, InvalidInput
from ..rngutil import derive_seed, make_rng
from .corpus import corpus_hash, load_word_list, sample_text
from .fonts import GlyphFont, make_font
from .render import TextImage, render_text_transformed

MANIFEST_VERSION = 1

_SAMPLE_STREAM = 0x53414D50

# word-count ranges per training phase: (style lo, style hi, gen lo, gen hi)
_PHASE_WORDS = {1: (2, 3, 2, 3), 2: (1, 8, 1, 32)}


@dataclass
class SamplePair:
    style_text: str
    gen_text: str
    style_image: TextImage
    gen_image: TextImage
    font_id: int
    seed: int


@dataclass
class DatasetConfig:
    num_samples: int
    num_fonts: int
    phase: int
    height_px: int
    out_dir: str
    seed: int


@dataclass
class DatasetManifest:
    path: Path
    header: dict
    records: list[dict]


def synth_sample(
    font: GlyphFont, words: list[str], phase: int, seed: int, height_px: int = 64
) -> SamplePair:
    """Draw texts and render a (style, target) image pair in one font.

    The same mild affine (per-word rotation, global shear) is applied to
    both images so the pair shares its geometry statistics.
    """
    if phase not in _PHASE_WORDS:
        raise InvalidInput(f"phase must be 1 or 2, got {phase}")
    s_lo, s_hi, g_lo, g_hi = _PHASE_WORDS[phase]
    rng = make_rng(seed, _SAMPLE_STREAM)
    n_style = int(rng.integers(s_lo, s_hi + 1))
    n_gen = int(rng.integers(g_lo, g_hi + 1))
    style_text = sample_text(rng, words, n_style)
    gen_text = sample_text(rng, words, n_gen)
    rot = float(rng.uniform(-3.0, 3.0))
    shear = float(rng.uniform(-0.1, 0.1))
    style_image = render_text_transformed(
        font, style_text, derive_seed(seed, 1), height_px, rot, shear
    )
    gen_image = render_text_transformed(
        font, gen_text, derive_seed(seed, 2), height_px, rot, shear
    )
    return SamplePair(
        style_text=style_text,
        gen_text=gen_text,
        style_image=style_image,
        gen_image=gen_image,
        font_id=font.font_id,
        seed=seed,
    )


def _save_png(pixels: np.ndarray, path: Path) -> None:
    try:
        Image.fromarray(pixels, mode="L").save(path)
    except OSError as exc:
        raise ErukuError(f"failed writing image {path}: {exc}") from None


def load_png(path: Path | str) -> np.ndarray:
    try:
        return np.asarray(Image.open(path).convert("L"), dtype=np.uint8)
    except OSError as exc:
        raise ErukuError(f"failed reading image {path}: {exc}") from None


def generate_dataset(cfg: DatasetConfig) -> DatasetManifest:
    out_dir = Path(cfg.out_dir)
    img_dir = out_dir / "img"
    img_dir.mkdir(parents=True, exist_ok=True)
    words = load_word_list()
    header = {
        "version": MANIFEST_VERSION,
        "height_px": cfg.height_px,
        "phase": cfg.phase,
        "corpus_hash": corpus_hash(words),
    }
    fonts: dict[int, GlyphFont] = {}
    records = []
    for i in range(cfg.num_samples):
        sample_seed = derive_seed(cfg.seed, i)
        font_id = int(derive_seed(cfg.seed, i, 1) % cfg.num_fonts)
        if font_id not in fonts:
            fonts[font_id] = make_font(font_id)
        pair = synth_sample(fonts[font_id], words, cfg.phase, sample_seed, cfg.height_px)
        s_rel = f"img/{i:06d}_s.png"
        g_rel = f"img/{i:06d}_g.png"
        _save_png(pair.style_image.pixels, out_dir / s_rel)
        _save_png(pair.gen_image.pixels, out_dir / g_rel)
        records.append(
            {
                "id": i,
                "style_text": pair.style_text,
                "gen_text": pair.gen_text,
                "style_image_path": s_rel,
                "gen_image_path": g_rel,
                "font_id": font_id,
                "seed": sample_seed,
            }
        )
    manifest_path = out_dir / "manifest.jsonl"
    try:
        with open(manifest_path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for rec in records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    except OSError as exc:
        raise ErukuError(f"failed writing manifest {manifest_path}: {exc}") from None
    return DatasetManifest(path=manifest_path, header=header, records=records)


def load_manifest(path: Path | str) -> DatasetManifest:
    path = Path(path)
    try:
        lines = path.read_text("utf-8").splitlines()
    except OSError as exc:
        raise ErukuError(f"failed reading manifest {path}: {exc}") from None
    if not lines:
        raise ErukuError(f"manifest {path} is empty")
    header = json.loads(lines[0])
    records = [json.loads(ln) for ln in lines[1:] if ln]
    return DatasetManifest(path=path, header=header, records=records)
