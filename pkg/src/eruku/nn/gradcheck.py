"""Central finite-difference gradient checking helpers."""

from __future__ import annotations

import numpy as np


def numeric_grad_entries(loss_fn, params: dict, entries, eps=1e-5):
    """Numeric d loss / d params[key][idx] for the given (key, idx) entries.

    ``loss_fn()`` must read ``params`` afresh each call.  Parameters
    should be float64 for meaningful comparisons.
    """
    out = []
    for key, idx in entries:
        p = params[key]
        orig = p[idx]
        p[idx] = orig + eps
        hi = loss_fn()
        p[idx] = orig - eps
        lo = loss_fn()
        p[idx] = orig
        out.append((hi - lo) / (2.0 * eps))
    return np.asarray(out, dtype=np.float64)


def numeric_grad(loss_fn, params: dict, key: str, eps=1e-5):
    """Full numeric gradient for one parameter tensor."""
    p = params[key]
    g = np.zeros_like(p)
    it = np.nditer(p, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        orig = p[idx]
        p[idx] = orig + eps
        hi = loss_fn()
        p[idx] = orig - eps
        lo = loss_fn()
        p[idx] = orig
        g[idx] = (hi - lo) / (2.0 * eps)
        it.iternext()
    return g


def sample_entries(params: dict, n: int, rng) -> list:
    """Draw ``n`` random (key, multi_index) coordinates across all tensors."""
    keys = sorted(params)
    sizes = np.array([params[k].size for k in keys], dtype=np.float64)
    probs = sizes / sizes.sum()
    entries = []
    for _ in range(n):
        k = keys[int(rng.choice(len(keys), p=probs))]
        flat = int(rng.integers(0, params[k].size))
        entries.append((k, np.unravel_index(flat, params[k].shape)))
    return entries


def rel_err(a: np.ndarray, b: np.ndarray, floor=1e-8) -> np.ndarray:
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
