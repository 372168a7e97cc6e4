"""Toy CTC text recognizer used for the readability metric.

Three stride-2 convolutions reduce a text image to one frame per 8
pixel columns; a tanh BiRNN over the frame sequence feeds per-frame
logits over printable ASCII plus a trailing blank.  Training is CTC on
single samples; decoding is greedy best-path.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from ..errors import CtcInfeasible, InvalidInput
from ..kernels import conv2d_backward, conv2d_forward, ctc_feasible_length, ctc_loss_grad
from ..nn import AdamW, ops
from ..rngutil import make_rng
from ..vae import pixels_to_ink

CHARSET = "".join(chr(c) for c in range(32, 127))
BLANK = len(CHARSET)  # 95


def labels_of(text: str) -> np.ndarray:
    ids = []
    for ch in text:
        o = ord(ch)
        if not 32 <= o <= 126:
            raise InvalidInput(f"character {ch!r} outside recognizer charset")
        ids.append(o - 32)
    return np.array(ids, dtype=np.int64)


@dataclass
class RecConfig:
    height_px: int = 64
    channels: tuple = (16, 32, 48)
    proj_dim: int = 128
    hidden: int = 64

    @property
    def frame_dim(self) -> int:
        return self.channels[-1] * (self.height_px // 8)

    def to_dict(self) -> dict:
        return {
            "height_px": self.height_px,
            "channels": list(self.channels),
            "proj_dim": self.proj_dim,
            "hidden": self.hidden,
        }

    @staticmethod
    def from_dict(d: dict) -> "RecConfig":
        d = dict(d)
        d["channels"] = tuple(d["channels"])
        return RecConfig(**d)


def init_params(cfg: RecConfig, seed: int = 0) -> dict[str, np.ndarray]:
    rng = make_rng(seed, 0x524543)
    p: dict[str, np.ndarray] = {}
    cin = 1
    for i, ch in enumerate(cfg.channels):
        std = math.sqrt(1.0 / (cin * 9))
        p[f"conv{i}/w"] = rng.normal(0.0, std, size=(ch, cin, 3, 3)).astype(np.float32)
        p[f"conv{i}/b"] = np.zeros(ch, dtype=np.float32)
        cin = ch
    fd = cfg.frame_dim

    def lin(name, a, b):
        p[f"{name}/w"] = rng.normal(0.0, math.sqrt(1.0 / a), size=(a, b)).astype(np.float32)
        p[f"{name}/b"] = np.zeros(b, dtype=np.float32)

    lin("proj", fd, cfg.proj_dim)
    h = cfg.hidden
    for d in ("fwd", "bwd"):
        p[f"rnn_{d}/wx"] = rng.normal(0.0, math.sqrt(1.0 / cfg.proj_dim), size=(cfg.proj_dim, h)).astype(np.float32)
        p[f"rnn_{d}/wh"] = rng.normal(0.0, math.sqrt(1.0 / h), size=(h, h)).astype(np.float32)
        p[f"rnn_{d}/b"] = np.zeros(h, dtype=np.float32)
    lin("out", 2 * h, len(CHARSET) + 1)
    return p


def _rnn_fwd(x: np.ndarray, wx, wh, b, reverse: bool):
    t_len, _ = x.shape
    hdim = wh.shape[0]
    order = range(t_len - 1, -1, -1) if reverse else range(t_len)
    hs = np.zeros((t_len, hdim), dtype=x.dtype)
    h = np.zeros(hdim, dtype=x.dtype)
    xw = x @ wx + b
    for t in order:
        h = np.tanh(xw[t] + h @ wh)
        hs[t] = h
    return hs


def _rnn_bwd(dhs: np.ndarray, hs: np.ndarray, x: np.ndarray, wx, wh, reverse: bool):
    t_len = x.shape[0]
    order = range(t_len) if reverse else range(t_len - 1, -1, -1)
    dwx = np.zeros_like(wx)
    dwh = np.zeros_like(wh)
    db = np.zeros(wh.shape[0], dtype=wx.dtype)
    dx = np.zeros_like(x)
    dh_carry = np.zeros(wh.shape[0], dtype=wx.dtype)
    first = t_len - 1 if reverse else 0
    for t in order:
        dh = dhs[t] + dh_carry
        da = dh * (1.0 - hs[t] * hs[t])
        dwx += np.outer(x[t], da)
        db += da
        dx[t] = da @ wx.T
        if t == first:
            dh_carry = np.zeros_like(dh_carry)
        else:
            h_prev = hs[t + 1] if reverse else hs[t - 1]
            dwh += np.outer(h_prev, da)
            dh_carry = da @ wh.T
    return dx, dwx, dwh, db


def rec_forward(pixels: np.ndarray, params: dict, cfg: RecConfig):
    """Image -> (log_probs (T, K), cache). T = W/8, K = charset + blank."""
    if pixels.ndim != 2 or pixels.shape[0] != cfg.height_px or pixels.shape[1] % 8:
        raise InvalidInput(f"recognizer expects ({cfg.height_px}, 8k) image, got {pixels.shape}")
    x = pixels_to_ink(pixels)[None, None]
    conv_caches = []
    for i in range(len(cfg.channels)):
        w, b = params[f"conv{i}/w"], params[f"conv{i}/b"]
        y = conv2d_forward(x, w, b, 2, 2, 1, 1)
        a, sc = ops.silu_fwd(y)
        conv_caches.append((x, w, y, sc))
        x = a
    _, c, fh, t_len = x.shape
    frames = np.ascontiguousarray(x[0].transpose(2, 0, 1)).reshape(t_len, c * fh)
    pj, pc = ops.linear_fwd(frames, params["proj/w"], params["proj/b"])
    pa, psc = ops.silu_fwd(pj)
    hs_f = _rnn_fwd(pa, params["rnn_fwd/wx"], params["rnn_fwd/wh"], params["rnn_fwd/b"], reverse=False)
    hs_b = _rnn_fwd(pa, params["rnn_bwd/wx"], params["rnn_bwd/wh"], params["rnn_bwd/b"], reverse=True)
    hcat = np.concatenate([hs_f, hs_b], axis=1)
    logits, oc = ops.linear_fwd(hcat, params["out/w"], params["out/b"])
    log_probs = ops.log_softmax(logits, axis=-1)
    cache = (conv_caches, (frames.shape, c, fh), pc, psc, pa, hs_f, hs_b, oc, log_probs)
    return log_probs, cache


def rec_backward(dlog_probs: np.ndarray, cache, params: dict, cfg: RecConfig):
    conv_caches, (fshape, c, fh), pc, psc, pa, hs_f, hs_b, oc, log_probs = cache
    # d logits for y = log_softmax(z): dz = dy - softmax(z) * sum(dy)
    probs = np.exp(log_probs)
    dlogits = dlog_probs - probs * dlog_probs.sum(axis=1, keepdims=True)
    grads: dict[str, np.ndarray] = {}
    dhcat, dw, db = ops.linear_bwd(dlogits, oc)
    grads["out/w"], grads["out/b"] = dw, db
    h = cfg.hidden
    dpa_f, dwx, dwh, db_ = _rnn_bwd(dhcat[:, :h], hs_f, pa, params["rnn_fwd/wx"], params["rnn_fwd/wh"], reverse=False)
    grads["rnn_fwd/wx"], grads["rnn_fwd/wh"], grads["rnn_fwd/b"] = dwx, dwh, db_
    dpa_b, dwx, dwh, db_ = _rnn_bwd(dhcat[:, h:], hs_b, pa, params["rnn_bwd/wx"], params["rnn_bwd/wh"], reverse=True)
    grads["rnn_bwd/wx"], grads["rnn_bwd/wh"], grads["rnn_bwd/b"] = dwx, dwh, db_
    dpj = ops.silu_bwd(dpa_f + dpa_b, psc)
    dframes, dw, db = ops.linear_bwd(dpj, pc)
    grads["proj/w"], grads["proj/b"] = dw, db
    t_len = fshape[0]
    dx = np.ascontiguousarray(dframes.reshape(t_len, c, fh).transpose(1, 2, 0))[None]
    for i in reversed(range(len(cfg.channels))):
        xin, w, y, sc = conv_caches[i]
        dy = ops.silu_bwd(dx, sc)
        dx, dw, db = conv2d_backward(xin, w, dy, 2, 2, 1, 1)
        grads[f"conv{i}/w"], grads[f"conv{i}/b"] = dw, db
    return grads


def ctc_step(pixels: np.ndarray, text: str, params: dict, cfg: RecConfig):
    """CTC loss and parameter grads for one (image, transcription) pair."""
    labels = labels_of(text)
    log_probs, cache = rec_forward(pixels, params, cfg)
    if log_probs.shape[0] < ctc_feasible_length(labels):
        raise CtcInfeasible(
            f"{log_probs.shape[0]} frames cannot align {len(labels)} labels"
        )
    loss, dlp = ctc_loss_grad(log_probs.astype(np.float64), labels, BLANK)
    grads = rec_backward(dlp.astype(log_probs.dtype), cache, params, cfg)
    return loss, grads


def transcribe(pixels: np.ndarray, params: dict, cfg: RecConfig) -> str:
    """Greedy best-path decode: collapse repeats, drop blanks."""
    log_probs, _ = rec_forward(pixels, params, cfg)
    path = log_probs.argmax(axis=1)
    out = []
    prev = -1
    for k in path:
        if k != prev and k != BLANK:
            out.append(CHARSET[k])
        prev = k
    return "".join(out)


@dataclass
class RecTrainConfig:
    steps: int = 4000
    lr: float = 1e-3
    wd: float = 1e-4
    seed: int = 0
    log_every: int = 200
    log_fn: object = None


def train_recognizer(samples: list, cfg: RecConfig, tcfg: RecTrainConfig):
    """samples: (pixels, text) pairs. Single-sample CTC steps under AdamW."""
    if not samples:
        raise InvalidInput("no recognizer training samples")
    params = init_params(cfg, seed=tcfg.seed)
    opt = AdamW(params, lr=tcfg.lr, weight_decay=tcfg.wd)
    rng = make_rng(tcfg.seed, 0x524354)
    log = []
    running = []
    for step in range(tcfg.steps):
        pixels, text = samples[int(rng.integers(0, len(samples)))]
        loss, grads = ctc_step(pixels, text, params, cfg)
        if not math.isfinite(loss):
            raise InvalidInput(f"non-finite CTC loss at step {step}")
        for k, v in params.items():
            if k not in grads:
                grads[k] = np.zeros_like(v)
        opt.step(grads)
        running.append(loss / max(len(text), 1))
        if step % tcfg.log_every == 0 or step == tcfg.steps - 1:
            entry = {"step": step, "ctc_per_char": float(np.mean(running[-tcfg.log_every:]))}
            log.append(entry)
            if tcfg.log_fn:
                tcfg.log_fn({"event": "rec_train", **entry})
    return params, log
