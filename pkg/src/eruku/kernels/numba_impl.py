"""Numba ``@njit`` kernels for the hot inner loops.

Contracts match :mod:`eruku.kernels.numpy_impl`.  Rasterization and the
CTC recursions run in float64 so both backends produce (near-)identical
results; convolution accumulates in the input dtype.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NEG_INF = -np.inf


# ---------------------------------------------------------------------------
# convolution


@njit(cache=True)
def _im2col(x, kh, kw, sh, sw, ph, pw, oh, ow):
    bsz, cin, h, wd = x.shape
    cols = np.zeros((bsz * oh * ow, cin * kh * kw), dtype=x.dtype)
    idx = 0
    for n in range(bsz):
        for i in range(oh):
            for j in range(ow):
                col = 0
                for c in range(cin):
                    for ki in range(kh):
                        ii = i * sh + ki - ph
                        for kj in range(kw):
                            jj = j * sw + kj - pw
                            if 0 <= ii < h and 0 <= jj < wd:
                                cols[idx, col] = x[n, c, ii, jj]
                            col += 1
                idx += 1
    return cols


@njit(cache=True)
def _col2im(dcols, bsz, cin, h, wd, kh, kw, sh, sw, ph, pw, oh, ow, dtype_ref):
    dx = np.zeros((bsz, cin, h, wd), dtype=dtype_ref.dtype)
    idx = 0
    for n in range(bsz):
        for i in range(oh):
            for j in range(ow):
                col = 0
                for c in range(cin):
                    for ki in range(kh):
                        ii = i * sh + ki - ph
                        for kj in range(kw):
                            jj = j * sw + kj - pw
                            if 0 <= ii < h and 0 <= jj < wd:
                                dx[n, c, ii, jj] += dcols[idx, col]
                            col += 1
                idx += 1
    return dx


@njit(cache=True)
def _scatter_nhwf_to_nfhw(flat, bsz, f, oh, ow, b):
    y = np.empty((bsz, f, oh, ow), dtype=flat.dtype)
    idx = 0
    for n in range(bsz):
        for i in range(oh):
            for j in range(ow):
                for fo in range(f):
                    y[n, fo, i, j] = flat[idx, fo] + b[fo]
                idx += 1
    return y


@njit(cache=True)
def _gather_nfhw_to_nhwf(dy):
    bsz, f, oh, ow = dy.shape
    flat = np.empty((bsz * oh * ow, f), dtype=dy.dtype)
    idx = 0
    for n in range(bsz):
        for i in range(oh):
            for j in range(ow):
                for fo in range(f):
                    flat[idx, fo] = dy[n, fo, i, j]
                idx += 1
    return flat


@njit(cache=True)
def _conv2d_forward_jit(x, w, b, sh, sw, ph, pw):
    # im2col gather in nopython loops, the matmul itself hits BLAS
    bsz, cin, h, wd = x.shape
    f, _, kh, kw = w.shape
    oh = (h + 2 * ph - kh) // sh + 1
    ow = (wd + 2 * pw - kw) // sw + 1
    cols = _im2col(x, kh, kw, sh, sw, ph, pw, oh, ow)
    wmat = np.ascontiguousarray(w.reshape(f, cin * kh * kw).T)
    flat = np.dot(cols, wmat)
    return _scatter_nhwf_to_nfhw(flat, bsz, f, oh, ow, b)


def conv2d_forward(x, w, b, sh, sw, ph, pw):
    # jit np.dot requires one dtype; promote like plain numpy would
    dt = np.result_type(x, w, b)
    return _conv2d_forward_jit(
        np.ascontiguousarray(x, dtype=dt),
        np.ascontiguousarray(w, dtype=dt),
        np.ascontiguousarray(b, dtype=dt),
        sh, sw, ph, pw,
    )


@njit(cache=True)
def _conv2d_backward_jit(x, w, dy, sh, sw, ph, pw):
    bsz, cin, h, wd = x.shape
    f, _, kh, kw = w.shape
    oh, ow = dy.shape[2], dy.shape[3]
    cols = _im2col(x, kh, kw, sh, sw, ph, pw, oh, ow)
    dyf = _gather_nfhw_to_nhwf(dy)
    db = np.zeros(f, dtype=w.dtype)
    for r in range(dyf.shape[0]):
        for fo in range(f):
            db[fo] += dyf[r, fo]
    dwmat = np.dot(np.ascontiguousarray(cols.T), dyf)  # (CKK, F)
    dw = np.ascontiguousarray(dwmat.T).reshape(f, cin, kh, kw).copy()
    wmat = np.ascontiguousarray(w.reshape(f, cin * kh * kw))
    dcols = np.dot(dyf, wmat)
    dx = _col2im(dcols, bsz, cin, h, wd, kh, kw, sh, sw, ph, pw, oh, ow, x)
    return dx, dw, db


def conv2d_backward(x, w, dy, sh, sw, ph, pw):
    dt = np.result_type(x, w, dy)
    return _conv2d_backward_jit(
        np.ascontiguousarray(x, dtype=dt),
        np.ascontiguousarray(w, dtype=dt),
        np.ascontiguousarray(dy, dtype=dt),
        sh, sw, ph, pw,
    )


# ---------------------------------------------------------------------------
# CTC forward-backward


@njit(cache=True)
def _logaddexp(a, b):
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a > b:
        return a + np.log1p(np.exp(b - a))
    return b + np.log1p(np.exp(a - b))


@njit(cache=True)
def _ctc_jit(lp, ext, blank, alpha, beta, gamma_bar):
    t_len = lp.shape[0]
    s = ext.shape[0]

    alpha[:] = NEG_INF
    alpha[0, 0] = lp[0, ext[0]]
    if s > 1:
        alpha[0, 1] = lp[0, ext[1]]
    for t in range(1, t_len):
        for si in range(s):
            a = alpha[t - 1, si]
            if si >= 1:
                a = _logaddexp(a, alpha[t - 1, si - 1])
            if si >= 2 and ext[si] != blank and ext[si] != ext[si - 2]:
                a = _logaddexp(a, alpha[t - 1, si - 2])
            alpha[t, si] = a + lp[t, ext[si]]

    loss = alpha[t_len - 1, s - 1]
    if s > 1:
        loss = _logaddexp(loss, alpha[t_len - 1, s - 2])
    loss = -loss

    beta[:] = NEG_INF
    beta[t_len - 1, s - 1] = 0.0
    if s > 1:
        beta[t_len - 1, s - 2] = 0.0
    for t in range(t_len - 2, -1, -1):
        for si in range(s):
            b = beta[t + 1, si] + lp[t + 1, ext[si]]
            if si + 1 < s:
                b = _logaddexp(b, beta[t + 1, si + 1] + lp[t + 1, ext[si + 1]])
            if si + 2 < s and ext[si + 2] != blank and ext[si + 2] != ext[si]:
                b = _logaddexp(b, beta[t + 1, si + 2] + lp[t + 1, ext[si + 2]])
            beta[t, si] = b

    gamma_bar[:] = 0.0
    for t in range(t_len):
        for si in range(s):
            lg = alpha[t, si] + beta[t, si] + loss
            if lg > NEG_INF:
                gamma_bar[t, ext[si]] += np.exp(lg)
    return loss


def ctc_alpha_beta(log_probs: np.ndarray, labels: np.ndarray, blank: int):
    t_len, k = log_probs.shape
    ext = np.full(2 * labels.shape[0] + 1, blank, dtype=np.int64)
    ext[1::2] = labels
    s = ext.shape[0]
    alpha = np.empty((t_len, s), dtype=np.float64)
    beta = np.empty((t_len, s), dtype=np.float64)
    gamma_bar = np.empty((t_len, k), dtype=np.float64)
    loss = _ctc_jit(
        np.ascontiguousarray(log_probs, dtype=np.float64), ext, blank, alpha, beta, gamma_bar
    )
    return float(loss), gamma_bar


# ---------------------------------------------------------------------------
# stroke rasterization


@njit(cache=True)
def _raster_jit(cov, segs, aa):
    h, w = cov.shape
    for k in range(segs.shape[0]):
        x0 = segs[k, 0]
        y0 = segs[k, 1]
        x1 = segs[k, 2]
        y1 = segs[k, 3]
        r = segs[k, 4]
        reach = r + aa * 0.5 + 1.0
        lo_x = max(int(np.floor(min(x0, x1) - reach)), 0)
        hi_x = min(int(np.ceil(max(x0, x1) + reach)) + 1, w)
        lo_y = max(int(np.floor(min(y0, y1) - reach)), 0)
        hi_y = min(int(np.ceil(max(y0, y1) + reach)) + 1, h)
        if lo_x >= hi_x or lo_y >= hi_y:
            continue
        dx = x1 - x0
        dy = y1 - y0
        len2 = dx * dx + dy * dy
        for iy in range(lo_y, hi_y):
            py = (iy + 0.5) - y0
            for ix in range(lo_x, hi_x):
                px = (ix + 0.5) - x0
                if len2 > 0:
                    t = (px * dx + py * dy) / len2
                    t = min(max(t, 0.0), 1.0)
                else:
                    t = 0.0
                ex = px - t * dx
                ey = py - t * dy
                d = np.sqrt(ex * ex + ey * ey)
                c = (r + aa * 0.5 - d) / aa
                c = min(max(c, 0.0), 1.0)
                if c > cov[iy, ix]:
                    cov[iy, ix] = c


def raster_segments(h: int, w: int, segs: np.ndarray, aa: float) -> np.ndarray:
    cov = np.zeros((h, w), dtype=np.float64)
    if segs.shape[0]:
        _raster_jit(cov, np.ascontiguousarray(segs, dtype=np.float64), float(aa))
    return cov.astype(np.float32)


# ---------------------------------------------------------------------------
# edit distance


@njit(cache=True)
def _lev_jit(a, b):
    n, m = a.shape[0], b.shape[0]
    prev = np.arange(m + 1)
    cur = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            cost = 0 if b[j - 1] == ai else 1
            best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            if prev[j - 1] + cost < best:
                best = prev[j - 1] + cost
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]


def levenshtein(a: np.ndarray, b: np.ndarray) -> int:
    if len(a) == 0:
        return len(b)
    if len(b) == 0:
        return len(a)
    return int(
        _lev_jit(np.ascontiguousarray(a, dtype=np.int64), np.ascontiguousarray(b, dtype=np.int64))
    )
