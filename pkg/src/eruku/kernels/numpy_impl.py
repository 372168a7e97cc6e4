"""Pure-numpy fallback kernels.

Same contracts as :mod:`eruku.kernels.numba_impl`.  Convolutions go
through im2col + one GEMM; the CTC recursions loop over time with the
label-state axis vectorized; Levenshtein uses the prefix-min trick to
remove the in-row dependency.
"""

from __future__ import annotations

import numpy as np

NEG_INF = -np.inf


# ---------------------------------------------------------------------------
# convolution


def _im2col(xp: np.ndarray, kh: int, kw: int, sh: int, sw: int, oh: int, ow: int) -> np.ndarray:
    # xp: padded input (B, C, Hp, Wp) -> (B, oh, ow, C, kh, kw)
    b, c = xp.shape[0], xp.shape[1]
    cols = np.empty((b, oh, ow, c, kh, kw), dtype=xp.dtype)
    for ki in range(kh):
        for kj in range(kw):
            cols[:, :, :, :, ki, kj] = xp[
                :, :, ki : ki + sh * oh : sh, kj : kj + sw * ow : sw
            ].transpose(0, 2, 3, 1)
    return cols


def conv2d_forward(x, w, b, sh, sw, ph, pw):
    bsz, cin, h, wd = x.shape
    f, _, kh, kw = w.shape
    oh = (h + 2 * ph - kh) // sh + 1
    ow = (wd + 2 * pw - kw) // sw + 1
    xp = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    cols = _im2col(xp, kh, kw, sh, sw, oh, ow).reshape(bsz * oh * ow, cin * kh * kw)
    y = cols @ w.reshape(f, -1).T + b
    return np.ascontiguousarray(y.reshape(bsz, oh, ow, f).transpose(0, 3, 1, 2))


def conv2d_backward(x, w, dy, sh, sw, ph, pw):
    bsz, cin, h, wd = x.shape
    f, _, kh, kw = w.shape
    oh, ow = dy.shape[2], dy.shape[3]
    xp = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    cols = _im2col(xp, kh, kw, sh, sw, oh, ow).reshape(bsz * oh * ow, cin * kh * kw)
    dyr = np.ascontiguousarray(dy.transpose(0, 2, 3, 1)).reshape(bsz * oh * ow, f)

    db = dyr.sum(axis=0)
    dw = (dyr.T @ cols).reshape(f, cin, kh, kw)

    dcols = (dyr @ w.reshape(f, -1)).reshape(bsz, oh, ow, cin, kh, kw)
    dxp = np.zeros_like(xp)
    for ki in range(kh):
        for kj in range(kw):
            dxp[:, :, ki : ki + sh * oh : sh, kj : kj + sw * ow : sw] += dcols[
                :, :, :, :, ki, kj
            ].transpose(0, 3, 1, 2)
    if ph or pw:
        dx = dxp[:, :, ph : ph + h, pw : pw + wd]
    else:
        dx = dxp
    return np.ascontiguousarray(dx), dw, db


# ---------------------------------------------------------------------------
# CTC forward-backward


def _extend_labels(labels: np.ndarray, blank: int) -> np.ndarray:
    s = np.full(2 * labels.shape[0] + 1, blank, dtype=labels.dtype)
    s[1::2] = labels
    return s


def ctc_alpha_beta(log_probs: np.ndarray, labels: np.ndarray, blank: int):
    """Alpha/beta recursions for one sample.

    log_probs: (T, K) log-softmax scores; labels: (L,) without blanks.
    Returns (loss, gamma_bar) where gamma_bar[t, k] is the posterior
    probability of emitting symbol k at frame t.
    """
    t_len, k = log_probs.shape
    ext = _extend_labels(labels, blank)
    s = ext.shape[0]
    lp = log_probs

    # alpha
    alpha = np.full((t_len, s), NEG_INF, dtype=np.float64)
    alpha[0, 0] = lp[0, ext[0]]
    if s > 1:
        alpha[0, 1] = lp[0, ext[1]]
    # skip transition allowed where label differs from the one two back
    can_skip = np.zeros(s, dtype=bool)
    can_skip[2:] = (ext[2:] != blank) & (ext[2:] != ext[:-2])
    prev1 = np.full(s, NEG_INF)
    prev2 = np.full(s, NEG_INF)
    for t in range(1, t_len):
        stay = alpha[t - 1]
        prev1[1:] = alpha[t - 1, : s - 1]
        if s > 2:
            prev2[2:] = np.where(can_skip[2:], alpha[t - 1, : s - 2], NEG_INF)
        alpha[t] = np.logaddexp(np.logaddexp(stay, prev1), prev2) + lp[t, ext]

    loss = -np.logaddexp(alpha[-1, s - 1], alpha[-1, s - 2] if s > 1 else NEG_INF)

    # beta
    beta = np.full((t_len, s), NEG_INF, dtype=np.float64)
    beta[-1, s - 1] = 0.0
    if s > 1:
        beta[-1, s - 2] = 0.0
    can_skip_fwd = np.zeros(s, dtype=bool)
    if s > 2:
        can_skip_fwd[: s - 2] = (ext[: s - 2] != blank) & (ext[: s - 2] != ext[2:])
    nxt1 = np.full(s, NEG_INF)
    nxt2 = np.full(s, NEG_INF)
    for t in range(t_len - 2, -1, -1):
        stay = beta[t + 1] + lp[t + 1, ext]
        nxt1[: s - 1] = beta[t + 1, 1:] + lp[t + 1, ext[1:]]
        if s > 2:
            nxt2[: s - 2] = np.where(
                can_skip_fwd[: s - 2], beta[t + 1, 2:] + lp[t + 1, ext[2:]], NEG_INF
            )
        beta[t] = np.logaddexp(np.logaddexp(stay, nxt1), nxt2)

    # posterior over symbols
    log_gamma = alpha + beta  # (T, S), already includes lp at t via alpha
    gamma_bar = np.zeros((t_len, k), dtype=np.float64)
    with np.errstate(invalid="ignore"):
        g = np.exp(log_gamma + loss)  # loss = -logP
    g[~np.isfinite(g)] = 0.0
    for si in range(s):
        gamma_bar[:, ext[si]] += g[:, si]
    return float(loss), gamma_bar


# ---------------------------------------------------------------------------
# stroke rasterization


def raster_segments(h: int, w: int, segs: np.ndarray, aa: float) -> np.ndarray:
    """Max ink coverage per pixel over capsule-shaped strokes.

    segs: (N, 5) rows (x0, y0, x1, y1, radius); pixel centers at integer
    coordinates + 0.5.  Coverage ramps linearly from 1 inside r - aa/2 to
    0 outside r + aa/2.
    """
    cov = np.zeros((h, w), dtype=np.float64)
    for x0, y0, x1, y1, r in segs:
        reach = r + aa * 0.5 + 1.0
        lo_x = max(int(np.floor(min(x0, x1) - reach)), 0)
        hi_x = min(int(np.ceil(max(x0, x1) + reach)) + 1, w)
        lo_y = max(int(np.floor(min(y0, y1) - reach)), 0)
        hi_y = min(int(np.ceil(max(y0, y1) + reach)) + 1, h)
        if lo_x >= hi_x or lo_y >= hi_y:
            continue
        ys = np.arange(lo_y, hi_y, dtype=np.float64)[:, None] + 0.5
        xs = np.arange(lo_x, hi_x, dtype=np.float64)[None, :] + 0.5
        dx = x1 - x0
        dy = y1 - y0
        len2 = dx * dx + dy * dy
        px = xs - x0
        py = ys - y0
        if len2 > 0:
            t = np.clip((px * dx + py * dy) / len2, 0.0, 1.0)
        else:
            t = np.zeros((hi_y - lo_y, hi_x - lo_x))
        ex = px - t * dx
        ey = py - t * dy
        d = np.sqrt(ex * ex + ey * ey)
        c = np.clip((r + aa * 0.5 - d) / aa, 0.0, 1.0)
        np.maximum(cov[lo_y:hi_y, lo_x:hi_x], c, out=cov[lo_y:hi_y, lo_x:hi_x])
    return cov.astype(np.float32)


# ---------------------------------------------------------------------------
# edit distance


def levenshtein(a: np.ndarray, b: np.ndarray) -> int:
    """Classic edit distance on integer code sequences."""
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    prev = np.arange(m + 1, dtype=np.int64)
    offs = np.arange(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        cost = (b != a[i - 1]).astype(np.int64)
        mj = np.minimum(prev[1:] + 1, prev[:-1] + cost)
        # cur[j] = j + min_{k<=j} u_k where u_0 = i, u_k = mj[k-1] - k
        u = np.empty(m + 1, dtype=np.int64)
        u[0] = i
        u[1:] = mj - offs[1:]
        prev = np.minimum.accumulate(u) + offs
    return int(prev[m])
