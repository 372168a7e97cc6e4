"""Timing comparison of the numba kernels against the numpy fallback."""

from __future__ import annotations

import time

import numpy as np

from .rngutil import make_rng

_SIZES = {
    # (conv batch, conv hw, ctc frames, ctc labels, raster segs, lev len)
    "small": (4, 64, 60, 12, 200, 120),
    "full": (16, 128, 200, 40, 800, 400),
}


def _time(fn, repeats: int) -> float:
    fn()  # warm-up covers jit compilation
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_bench(sizes: str = "small", repeats: int = 3, seed: int = 0):
    from . import kernels
    from .kernels import numpy_impl

    impls = [("numpy", numpy_impl)]
    try:
        from .kernels import numba_impl

        impls.append(("numba", numba_impl))
    except ImportError:
        pass

    b, hw, t_len, n_lab, n_seg, n_lev = _SIZES[sizes]
    rng = make_rng(seed, 0x42454E43)
    x = rng.normal(size=(b, 16, hw, hw)).astype(np.float32)
    w = rng.normal(0, 0.05, size=(32, 16, 3, 3)).astype(np.float32)
    bias = np.zeros(32, dtype=np.float32)
    y_ref = numpy_impl.conv2d_forward(x, w, bias, 2, 2, 1, 1)
    dy = rng.normal(size=y_ref.shape).astype(np.float32)

    logits = rng.normal(size=(t_len, 96))
    logits -= np.log(np.exp(logits).sum(axis=1, keepdims=True))
    labels = rng.integers(0, 95, size=n_lab)

    segs = rng.uniform(2, 60, size=(n_seg, 5)).astype(np.float64)
    segs[:, 4] = rng.uniform(1.0, 2.0, size=n_seg)

    sa = rng.integers(0, 95, size=n_lev)
    sb = rng.integers(0, 95, size=n_lev)

    cases = [
        ("conv2d_forward", lambda m: m.conv2d_forward(x, w, bias, 2, 2, 1, 1)),
        ("conv2d_backward", lambda m: m.conv2d_backward(x, w, dy, 2, 2, 1, 1)),
        ("ctc_alpha_beta", lambda m: m.ctc_alpha_beta(logits, labels, 95)),
        ("raster_segments", lambda m: m.raster_segments(64, 256, segs, 1.0)),
        ("levenshtein", lambda m: m.levenshtein(sa, sb)),
    ]
    rows = []
    for name, call in cases:
        row = {"event": "bench", "kernel": name, "size": sizes, "backend": kernels.BACKEND}
        for impl_name, mod in impls:
            row[f"{impl_name}_ms"] = round(_time(lambda m=mod: call(m), repeats) * 1e3, 3)
        if "numba_ms" in row and row["numba_ms"] > 0:
            row["speedup"] = round(row["numpy_ms"] / row["numba_ms"], 2)
        rows.append(row)
    return rows
