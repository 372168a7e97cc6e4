"""Autoregressive inference: token-type state machine plus text-only CFG.

Generation decodes greedily from an inference tape [SOS, proj(style
columns), SOG].  With guidance scale gamma != 1 two decoder streams
advance in lockstep, conditional and unconditional; they share the tape
and differ only in the encoder text, so the style image conditions both.
The guided latent and type logits are

    out = uncond + gamma * (cond - uncond)

and the guided output is appended to both streams.  All decisions are
deterministic: greedy argmax over three type classes and a point
regression for the column latent.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from . import armodel
from .errors import EmptyGeneration, InvalidInput
from .fontsynth import TextImage
from .textcodec import encode_text, make_unconditional
from .vae import LatentColumnSeq, VaeBundle, decode

STOP_EOG = "EOG"
STOP_MAX_COLS = "MaxCols"


@dataclass
class GenConfig:
    gamma: float = 1.25
    max_cols: int | None = None  # None -> 64 + 8 * len(gen_text)
    max_extra_sog: int = 1


@dataclass
class GenResult:
    columns: LatentColumnSeq | None  # generated columns, raw latent space; None if no IMG steps
    stop_reason: str
    steps_taken: int
    sog_insertions: int

    @property
    def num_columns(self) -> int:
        return self.columns.width if self.columns is not None else 0


def _resolve_max_cols(cfg: GenConfig, gen_text: str) -> int:
    max_cols = cfg.max_cols if cfg.max_cols is not None else 64 + 8 * len(gen_text)
    if max_cols < 1:
        raise InvalidInput(f"max_cols must be >= 1, got {max_cols}")
    return max_cols


def cfg_combine(cond: np.ndarray, uncond: np.ndarray, gamma: float) -> np.ndarray:
    """Classifier-free guidance: uncond + gamma * (cond - uncond)."""
    return uncond + gamma * (cond - uncond)


def generate(style_image: TextImage | np.ndarray, style_text, gen_text: str,
             vae: VaeBundle, ar_params: dict, ar_cfg: armodel.ArConfig,
             cfg: GenConfig) -> GenResult:
    if not math.isfinite(cfg.gamma) or cfg.gamma < 0:
        raise InvalidInput(f"gamma must be finite and >= 0, got {cfg.gamma}")
    if cfg.max_extra_sog < 0:
        raise InvalidInput("max_extra_sog must be >= 0")
    max_cols = _resolve_max_cols(cfg, gen_text)

    cond = encode_text(style_text, gen_text)
    single = cfg.gamma == 1.0  # exact short-circuit: one stream, no arithmetic
    if single:
        seqs = [cond]
    else:
        seqs = [cond, make_unconditional(cond)]
    n_streams = len(seqs)

    style_cols = vae.encode_norm(style_image)
    tape = armodel.build_tape(style_cols, None, ar_params)
    state = armodel.start_decoder(ar_params, ar_cfg, seqs)
    emb = np.broadcast_to(tape.embeddings[:, None], (tape.embeddings.shape[0], 1, ar_cfg.dim))
    for t in range(emb.shape[0]):
        step_in = np.ascontiguousarray(np.repeat(emb[t][None], n_streams, axis=0))
        logits, latent = state.step(step_in)

    columns: list[np.ndarray] = []
    steps_taken = 0
    sog_insertions = 0
    stop_reason = STOP_MAX_COLS
    while True:
        if single:
            g_logits, g_lat = logits[0], latent[0]
        else:
            g_logits = cfg_combine(logits[0], logits[1], cfg.gamma)
            g_lat = cfg_combine(latent[0], latent[1], cfg.gamma)
        steps_taken += 1
        token = int(np.argmax(g_logits))  # ties resolve to the lowest class
        if token == armodel.TYPE_EOG:
            stop_reason = STOP_EOG
            break
        if token == armodel.TYPE_SOG:
            sog_insertions += 1
            if sog_insertions > cfg.max_extra_sog:
                stop_reason = STOP_MAX_COLS
                break
            next_emb = ar_params["e_sog"][None]
        else:
            columns.append(g_lat)
            if len(columns) >= max_cols:
                stop_reason = STOP_MAX_COLS
                break
            next_emb = armodel.project_columns(g_lat[None], ar_params)
        step_in = np.ascontiguousarray(np.repeat(next_emb[None], n_streams, axis=0))
        logits, latent = state.step(step_in)

    if columns:
        norm = np.stack(columns).astype(np.float32)
        raw = norm * vae.lat_sd + vae.lat_mu
        col_seq = LatentColumnSeq(columns=raw, width=raw.shape[0])
    else:
        col_seq = None
    return GenResult(
        columns=col_seq,
        stop_reason=stop_reason,
        steps_taken=steps_taken,
        sog_insertions=sog_insertions,
    )


def generate_image(style_image, style_text, gen_text: str, vae: VaeBundle,
                   ar_params: dict, ar_cfg: armodel.ArConfig,
                   cfg: GenConfig) -> TextImage:
    """Generate latent columns and decode them to pixels (width = 8 per column)."""
    result = generate(style_image, style_text, gen_text, vae, ar_params, ar_cfg, cfg)
    if result.columns is None:
        raise EmptyGeneration(
            f"no columns generated (stop_reason={result.stop_reason})"
        )
    return decode(result.columns, vae.params, vae.cfg)
