"""Dense primitives with hand-written backward passes."""

from __future__ import annotations

import numpy as np

LN_EPS = 1e-5


def linear_fwd(x, w, b):
    """x: (..., din), w: (din, dout), b: (dout,)."""
    return x @ w + b, (x, w)


def linear_bwd(dy, cache):
    x, w = cache
    dx = dy @ w.T
    din = x.shape[-1]
    dout = dy.shape[-1]
    dw = x.reshape(-1, din).T @ dy.reshape(-1, dout)
    db = dy.reshape(-1, dout).sum(axis=0)
    return dx, dw, db


def layernorm_fwd(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = xc * inv
    return g * xhat + b, (xhat, inv, g)


def layernorm_bwd(dy, cache):
    xhat, inv, g = cache
    dg = (dy * xhat).reshape(-1, xhat.shape[-1]).sum(axis=0)
    db = dy.reshape(-1, xhat.shape[-1]).sum(axis=0)
    dxhat = dy * g
    m1 = dxhat.mean(axis=-1, keepdims=True)
    m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
    dx = inv * (dxhat - m1 - xhat * m2)
    return dx, dg, db


def silu_fwd(x):
    s = 1.0 / (1.0 + np.exp(-x))
    return x * s, (x, s)


def silu_bwd(dy, cache):
    x, s = cache
    return dy * (s * (1.0 + x * (1.0 - s)))


def softmax(x, axis=-1):
    z = x - x.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(x, axis=-1):
    z = x - x.max(axis=axis, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=axis, keepdims=True))


def cross_entropy_fwd(logits, targets, weights):
    """Weighted CE: logits (N, K), targets (N,), weights (N,).

    Returns (sum_i weights_i * nll_i, probs).  The caller handles the
    normalization; the matching backward takes the same weights.
    """
    lsm = log_softmax(logits, axis=-1)
    nll = -lsm[np.arange(logits.shape[0]), targets]
    return float((weights * nll).sum()), np.exp(lsm)


def cross_entropy_bwd(probs, targets, weights):
    d = probs * weights[:, None]
    d[np.arange(probs.shape[0]), targets] -= weights
    return d


def sinusoid_positions(t_len: int, dim: int, dtype=np.float32) -> np.ndarray:
    """Standard fixed sinusoidal position encodings, (t_len, dim)."""
    pos = np.arange(t_len, dtype=np.float64)[:, None]
    i = np.arange(dim // 2, dtype=np.float64)[None, :]
    ang = pos / np.power(10000.0, 2.0 * i / dim)
    out = np.zeros((t_len, dim), dtype=np.float64)
    out[:, 0::2] = np.sin(ang)
    out[:, 1::2] = np.cos(ang)
    return out.astype(dtype)


def embedding_fwd(table, ids):
    return table[ids], (table.shape, ids)


def embedding_bwd(dy, cache):
    shape, ids = cache
    dtable = np.zeros(shape, dtype=dy.dtype)
    np.add.at(dtable, ids.reshape(-1), dy.reshape(-1, shape[1]))
    return dtable
