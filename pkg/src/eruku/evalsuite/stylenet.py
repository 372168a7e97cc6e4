"""Small font classifier whose penultimate features drive the style metric.

Three stride-2 convolutions, global average pooling to a 32-d feature,
one linear classifier head over font ids.  Variable-width inputs are
handled by the pooling; training uses fixed-width crops for batching.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from ..errors import InvalidInput
from ..kernels import conv2d_backward, conv2d_forward
from ..nn import AdamW, ops
from ..rngutil import make_rng
from ..vae import pixels_to_ink


@dataclass
class StyleNetConfig:
    height_px: int = 64
    channels: tuple = (8, 16, 32)
    n_fonts: int = 5

    @property
    def feature_dim(self) -> int:
        return self.channels[-1]

    def to_dict(self) -> dict:
        return {
            "height_px": self.height_px,
            "channels": list(self.channels),
            "n_fonts": self.n_fonts,
        }

    @staticmethod
    def from_dict(d: dict) -> "StyleNetConfig":
        d = dict(d)
        d["channels"] = tuple(d["channels"])
        return StyleNetConfig(**d)


def init_params(cfg: StyleNetConfig, seed: int = 0) -> dict[str, np.ndarray]:
    rng = make_rng(seed, 0x535459)
    p: dict[str, np.ndarray] = {}
    cin = 1
    for i, ch in enumerate(cfg.channels):
        std = math.sqrt(1.0 / (cin * 9))
        p[f"conv{i}/w"] = rng.normal(0.0, std, size=(ch, cin, 3, 3)).astype(np.float32)
        p[f"conv{i}/b"] = np.zeros(ch, dtype=np.float32)
        cin = ch
    p["head/w"] = rng.normal(0.0, math.sqrt(1.0 / cfg.feature_dim),
                             size=(cfg.feature_dim, cfg.n_fonts)).astype(np.float32)
    p["head/b"] = np.zeros(cfg.n_fonts, dtype=np.float32)
    return p


def _trunk_fwd(x: np.ndarray, params: dict, cfg: StyleNetConfig):
    caches = []
    for i in range(len(cfg.channels)):
        w, b = params[f"conv{i}/w"], params[f"conv{i}/b"]
        y = conv2d_forward(x, w, b, 2, 2, 1, 1)
        a, sc = ops.silu_fwd(y)
        caches.append((x, w, sc))
        x = a
    feats = x.mean(axis=(2, 3))  # (B, C) global average pool
    return feats, (caches, x.shape)


def _trunk_bwd(dfeats: np.ndarray, cache, params: dict, cfg: StyleNetConfig, grads: dict):
    caches, act_shape = cache
    b, c, h, w = act_shape
    dx = np.broadcast_to(dfeats[:, :, None, None] / (h * w), act_shape).astype(dfeats.dtype)
    for i in reversed(range(len(cfg.channels))):
        xin, wgt, sc = caches[i]
        dy = ops.silu_bwd(dx, sc)
        dx, dw, db = conv2d_backward(xin, wgt, dy, 2, 2, 1, 1)
        grads[f"conv{i}/w"], grads[f"conv{i}/b"] = dw, db
    return dx


def features(pixels: np.ndarray, params: dict, cfg: StyleNetConfig) -> np.ndarray:
    """Penultimate feature vector for one (H, W) image."""
    if pixels.ndim != 2 or pixels.shape[0] != cfg.height_px:
        raise InvalidInput(f"stylenet expects ({cfg.height_px}, W) image, got {pixels.shape}")
    x = pixels_to_ink(pixels)[None, None]
    feats, _ = _trunk_fwd(x, params, cfg)
    return feats[0]


def classify(pixels: np.ndarray, params: dict, cfg: StyleNetConfig) -> int:
    f = features(pixels, params, cfg)
    return int(np.argmax(f @ params["head/w"] + params["head/b"]))


def _crop(pixels: np.ndarray, width: int, rng) -> np.ndarray:
    w = pixels.shape[1]
    if w <= width:
        out = np.full((pixels.shape[0], width), 255, dtype=pixels.dtype)
        out[:, :w] = pixels
        return out
    x0 = int(rng.integers(0, w - width + 1))
    return pixels[:, x0 : x0 + width]


@dataclass
class StyleTrainConfig:
    steps: int = 1500
    batch: int = 16
    crop_w: int = 64
    lr: float = 1e-3
    wd: float = 1e-4
    seed: int = 0
    log_every: int = 100
    log_fn: object = None


def train_stylenet(samples: list, cfg: StyleNetConfig, tcfg: StyleTrainConfig):
    """samples: (pixels, font_id) pairs; font_id in [0, n_fonts)."""
    if not samples:
        raise InvalidInput("no stylenet training samples")
    for _, fid in samples:
        if not 0 <= fid < cfg.n_fonts:
            raise InvalidInput(f"font id {fid} outside [0, {cfg.n_fonts})")
    params = init_params(cfg, seed=tcfg.seed)
    opt = AdamW(params, lr=tcfg.lr, weight_decay=tcfg.wd)
    rng = make_rng(tcfg.seed, 0x535454)
    log = []
    for step in range(tcfg.steps):
        idx = rng.integers(0, len(samples), size=tcfg.batch)
        imgs = []
        labels = []
        for i in idx:
            px, fid = samples[int(i)]
            imgs.append(pixels_to_ink(_crop(px, tcfg.crop_w, rng)))
            labels.append(fid)
        x = np.stack(imgs)[:, None]
        y = np.array(labels, dtype=np.int64)
        feats, tc = _trunk_fwd(x, params, cfg)
        logits, lc = ops.linear_fwd(feats, params["head/w"], params["head/b"])
        wvec = np.full(len(y), 1.0 / len(y), dtype=logits.dtype)
        loss, probs = ops.cross_entropy_fwd(logits, y, wvec)
        if not math.isfinite(loss):
            raise InvalidInput(f"non-finite stylenet loss at step {step}")
        dlogits = ops.cross_entropy_bwd(probs, y, wvec)
        grads: dict[str, np.ndarray] = {}
        dfeats, dw, db = ops.linear_bwd(dlogits, lc)
        grads["head/w"], grads["head/b"] = dw, db
        _trunk_bwd(dfeats, tc, params, cfg, grads)
        opt.step(grads)
        if step % tcfg.log_every == 0 or step == tcfg.steps - 1:
            acc = float((logits.argmax(axis=1) == y).mean())
            entry = {"step": step, "ce": float(loss), "acc": acc}
            log.append(entry)
            if tcfg.log_fn:
                tcfg.log_fn({"event": "style_train", **entry})
    return params, log
