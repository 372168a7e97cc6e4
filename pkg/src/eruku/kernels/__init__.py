"""Hot-loop kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen once at import time from the ``ERUKU_BACKEND``
environment variable ("numba" or "numpy", defaulting to numba when it is
importable).  Both implementations share the same contracts and are
exercised against each other in the test suite.
"""

from __future__ import annotations

import numpy as np

from ..backend import resolve_backend
from ..errors import CtcInfeasible

BACKEND = resolve_backend()

if BACKEND == "numba":
    from . import numba_impl as _impl
else:
    from . import numpy_impl as _impl

conv2d_forward = _impl.conv2d_forward
conv2d_backward = _impl.conv2d_backward
ctc_alpha_beta = _impl.ctc_alpha_beta
raster_segments = _impl.raster_segments


def _codes(s) -> np.ndarray:
    if isinstance(s, str):
        return np.array([ord(c) for c in s], dtype=np.int64)
    return np.asarray(s, dtype=np.int64)


def levenshtein(a, b) -> int:
    """Edit distance over strings or integer code sequences."""
    return _impl.levenshtein(_codes(a), _codes(b))


def ctc_feasible_length(labels: np.ndarray) -> int:
    """Minimum number of frames needed to emit ``labels``."""
    labels = np.asarray(labels)
    if labels.size == 0:
        return 0
    repeats = int(np.sum(labels[1:] == labels[:-1]))
    return int(labels.size + repeats)

def ctc_loss_grad(log_probs: np.ndarray, labels: np.ndarray, blank: int):
    """CTC loss and gradient w.r.t. the (pre-log-softmax) logits.

    ``log_probs`` is the (T, K) log-softmax output.  Returns
    ``(loss, grad)`` where ``grad = softmax - gamma_bar`` is the exact
    gradient of the loss w.r.t. the logits that produced ``log_probs``.
    Raises :class:`CtcInfeasible` when the label sequence cannot fit in
    ``T`` frames.
    """
    log_probs = np.asarray(log_probs)
    labels = np.asarray(labels, dtype=np.int64)
    t_len = log_probs.shape[0]
    need = ctc_feasible_length(labels)
    if t_len < need or t_len < 1:
        raise CtcInfeasible(
            f"label length requires at least {need} frames, got {t_len}"
        )
    loss, gamma_bar = ctc_alpha_beta(log_probs.astype(np.float64), labels, blank)
    grad = np.exp(log_probs.astype(np.float64)) - gamma_bar
    return loss, grad
