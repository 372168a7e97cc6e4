"""Multi-head attention: batched forward/backward plus a cached
single-position step for incremental decoding.

Masks are additive float arrays broadcastable to (B, H, Tq, Tk); use
-inf to forbid a key (exp(-inf) = 0 exactly, so masking is exact).
"""

from __future__ import annotations

import numpy as np

from .ops import softmax


def _split_heads(x, n_heads):
    b, t, d = x.shape
    dh = d // n_heads
    return x.reshape(b, t, n_heads, dh).transpose(0, 2, 1, 3)


def _merge_heads(x):
    b, h, t, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, h * dh)


def mha_fwd(xq, xkv, wq, bq, wk, bk, wv, bv, wo, bo, n_heads, mask=None):
    """xq: (B, Tq, D), xkv: (B, Tk, D); returns (y, cache)."""
    d = xq.shape[-1]
    dh = d // n_heads
    q = _split_heads(xq @ wq + bq, n_heads)
    k = _split_heads(xkv @ wk + bk, n_heads)
    v = _split_heads(xkv @ wv + bv, n_heads)
    scores = (q @ k.transpose(0, 1, 3, 2)) / np.sqrt(np.asarray(dh, dtype=xq.dtype))
    if mask is not None:
        scores = scores + mask
    p = softmax(scores, axis=-1)
    ctx = _merge_heads(p @ v)
    y = ctx @ wo + bo
    return y, (xq, xkv, q, k, v, p, ctx, wq, wk, wv, wo, n_heads)


def mha_bwd(dy, cache):
    xq, xkv, q, k, v, p, ctx, wq, wk, wv, wo, n_heads = cache
    d = xq.shape[-1]
    dh = d // n_heads
    scale = 1.0 / np.sqrt(np.asarray(dh, dtype=xq.dtype))

    dwo = ctx.reshape(-1, d).T @ dy.reshape(-1, d)
    dbo = dy.reshape(-1, d).sum(axis=0)
    dctx = _split_heads(dy @ wo.T, n_heads)

    dp = dctx @ v.transpose(0, 1, 3, 2)
    dv = p.transpose(0, 1, 3, 2) @ dctx
    # softmax backward: dS = P * (dP - sum(dP * P))
    ds = p * (dp - (dp * p).sum(axis=-1, keepdims=True))
    ds = ds * scale
    dq = ds @ k
    dk = ds.transpose(0, 1, 3, 2) @ q

    dq_in = _merge_heads(dq)
    dk_in = _merge_heads(dk)
    dv_in = _merge_heads(dv)

    dwq = xq.reshape(-1, d).T @ dq_in.reshape(-1, d)
    dbq = dq_in.reshape(-1, d).sum(axis=0)
    dwk = xkv.reshape(-1, d).T @ dk_in.reshape(-1, d)
    dbk = dk_in.reshape(-1, d).sum(axis=0)
    dwv = xkv.reshape(-1, d).T @ dv_in.reshape(-1, d)
    dbv = dv_in.reshape(-1, d).sum(axis=0)

    dxq = dq_in @ wq.T
    dxkv = dk_in @ wk.T + dv_in @ wv.T
    return dxq, dxkv, (dwq, dbq, dwk, dbk, dwv, dbv, dwo, dbo)


def mha_project_kv(xkv, wk, bk, wv, bv, n_heads):
    """Precompute (k, v) head tensors once for repeated cached queries."""
    return _split_heads(xkv @ wk + bk, n_heads), _split_heads(xkv @ wv + bv, n_heads)


def mha_step(xq, k, v, wq, bq, wo, bo, n_heads, mask=None):
    """Single-query attention against precomputed keys/values.

    xq: (B, 1, D); k, v: (B, H, Tk, dh).  Returns (B, 1, D).
    """
    d = xq.shape[-1]
    dh = d // n_heads
    q = _split_heads(xq @ wq + bq, n_heads)
    scores = (q @ k.transpose(0, 1, 3, 2)) / np.sqrt(np.asarray(dh, dtype=xq.dtype))
    if mask is not None:
        scores = scores + mask
    p = softmax(scores, axis=-1)
    ctx = _merge_heads(p @ v)
    return ctx @ wo + bo
