"""Kernel backend selection.

Hot inner loops (convolution, CTC dynamic programming, stroke
rasterization, edit distance) have two implementations: numba ``@njit``
kernels and pure-numpy fallbacks.  The active backend is chosen once, at
import of :mod:`eruku.kernels`, from the ``ERUKU_BACKEND`` environment
variable:

* ``ERUKU_BACKEND=numba``  -- force numba (error if unavailable)
* ``ERUKU_BACKEND=numpy``  -- force the pure-numpy fallbacks
* unset                    -- numba when importable, else numpy

Everything GEMM-bound (attention, linear layers) goes through numpy's
BLAS regardless of backend.
"""

from __future__ import annotations

import os

_VALID = ("numba", "numpy")


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def resolve_backend(env: str | None = None) -> str:
    """Return the backend name ("numba" or "numpy") for this process."""
    choice = env if env is not None else os.environ.get("ERUKU_BACKEND", "")
    choice = choice.strip().lower()
    if choice and choice not in _VALID:
        raise ValueError(f"ERUKU_BACKEND must be one of {_VALID}, got {choice!r}")
    if choice == "numba":
        if not numba_available():
            raise RuntimeError("ERUKU_BACKEND=numba but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    return "numba" if numba_available() else "numpy"
