"""Backend equivalence and oracle checks for the hot kernels."""

import itertools

import numpy as np
import pytest

from eruku.errors import CtcInfeasible
from eruku.kernels import (
    BACKEND,
    ctc_feasible_length,
    ctc_loss_grad,
    levenshtein,
    numpy_impl,
)
from eruku.rngutil import make_rng

from _oracles import lev_ref

try:
    from eruku.kernels import numba_impl
except ImportError:  # pragma: no cover
    numba_impl = None

needs_numba = pytest.mark.skipif(numba_impl is None, reason="numba unavailable")


def test_backend_resolved():
    assert BACKEND in ("numba", "numpy")


@needs_numba
def test_conv2d_forward_backends_match():
    rng = make_rng(10)
    for bsz, cin, cout, hw, stride in ((2, 1, 8, 17, 2), (3, 4, 6, 12, 1), (1, 3, 5, 9, 2)):
        x = rng.normal(size=(bsz, cin, hw, hw)).astype(np.float32)
        w = rng.normal(0, 0.1, size=(cout, cin, 3, 3)).astype(np.float32)
        b = rng.normal(size=cout).astype(np.float32)
        ya = numpy_impl.conv2d_forward(x, w, b, stride, stride, 1, 1)
        yb = numba_impl.conv2d_forward(x, w, b, stride, stride, 1, 1)
        # GEMM accumulation order differs between the two paths; only ulp noise allowed
        assert np.allclose(ya, yb, rtol=1e-6, atol=1e-6)


@needs_numba
def test_conv2d_backward_backends_match():
    rng = make_rng(11)
    x = rng.normal(size=(2, 3, 14, 14)).astype(np.float32)
    w = rng.normal(0, 0.1, size=(5, 3, 3, 3)).astype(np.float32)
    b = np.zeros(5, np.float32)
    y = numpy_impl.conv2d_forward(x, w, b, 2, 2, 1, 1)
    dy = rng.normal(size=y.shape).astype(np.float32)
    outs_np = numpy_impl.conv2d_backward(x, w, dy, 2, 2, 1, 1)
    outs_nb = numba_impl.conv2d_backward(x, w, dy, 2, 2, 1, 1)
    for a, b_ in zip(outs_np, outs_nb):
        assert np.allclose(a, b_, atol=1e-5)


def test_conv2d_numeric_gradient():
    rng = make_rng(12)
    x = rng.normal(size=(1, 2, 8, 8)).astype(np.float64)
    w = rng.normal(0, 0.2, size=(3, 2, 3, 3)).astype(np.float64)
    b = rng.normal(size=3).astype(np.float64)
    dy = rng.normal(size=numpy_impl.conv2d_forward(x, w, b, 2, 2, 1, 1).shape)

    def loss(xx, ww, bb):
        return float((numpy_impl.conv2d_forward(xx, ww, bb, 2, 2, 1, 1) * dy).sum())

    dx, dw, db = numpy_impl.conv2d_backward(x, w, dy, 2, 2, 1, 1)
    eps = 1e-6
    for arr, grad in ((x, dx), (w, dw), (b, db)):
        flat = arr.reshape(-1)
        for idx in rng.integers(0, flat.size, size=6):
            orig = flat[idx]
            flat[idx] = orig + eps
            hi = loss(x, w, b)
            flat[idx] = orig - eps
            lo = loss(x, w, b)
            flat[idx] = orig
            num = (hi - lo) / (2 * eps)
            assert abs(num - grad.reshape(-1)[idx]) < 1e-6


# ---------------------------------------------------------------------------
# CTC


def _ctc_brute_force(log_probs, labels, blank):
    """Enumerate every alignment path; only viable for tiny T."""
    t_len, k = log_probs.shape
    total = -np.inf
    for path in itertools.product(range(k), repeat=t_len):
        out = []
        prev = -1
        for s in path:
            if s != prev and s != blank:
                out.append(s)
            prev = s
        if out == list(labels):
            total = np.logaddexp(total, sum(log_probs[t, s] for t, s in enumerate(path)))
    return -total


@pytest.mark.parametrize("case", range(12))
def test_ctc_matches_brute_force(case):
    rng = make_rng(900 + case)
    t_len = int(rng.integers(2, 6))
    k = int(rng.integers(2, 4)) + 1
    n_lab = int(rng.integers(1, 3))
    labels = rng.integers(0, k - 1, size=n_lab)
    if ctc_feasible_length(labels) > t_len:
        labels = labels[:1]
    logits = rng.normal(size=(t_len, k))
    log_probs = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
    loss, _ = ctc_loss_grad(log_probs, labels, blank=k - 1)
    ref = _ctc_brute_force(log_probs, labels, blank=k - 1)
    assert abs(loss - ref) < 1e-9


def test_ctc_gradient_numeric():
    rng = make_rng(77)
    t_len, k = 6, 5
    labels = np.array([0, 1, 1])
    logits = rng.normal(size=(t_len, k))

    def loss_of(lg):
        lp = lg - np.log(np.exp(lg).sum(axis=1, keepdims=True))
        return ctc_loss_grad(lp, labels, blank=k - 1)[0]

    lp = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
    _, grad = ctc_loss_grad(lp, labels, blank=k - 1)
    eps = 1e-6
    for t in range(t_len):
        for j in range(k):
            orig = logits[t, j]
            logits[t, j] = orig + eps
            hi = loss_of(logits)
            logits[t, j] = orig - eps
            lo = loss_of(logits)
            logits[t, j] = orig
            assert abs((hi - lo) / (2 * eps) - grad[t, j]) < 1e-7


@needs_numba
def test_ctc_backends_match():
    rng = make_rng(13)
    logits = rng.normal(size=(30, 10))
    lp = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
    labels = rng.integers(0, 9, size=8)
    la, ga = numpy_impl.ctc_alpha_beta(lp, labels, 9)
    lb, gb = numba_impl.ctc_alpha_beta(lp, labels, 9)
    assert abs(la - lb) < 1e-12
    assert np.allclose(ga, gb, atol=1e-12)


def test_ctc_infeasible_raises():
    lp = np.log(np.full((2, 4), 0.25))
    with pytest.raises(CtcInfeasible):
        ctc_loss_grad(lp, np.array([0, 0]), blank=3)  # needs 3 frames
    with pytest.raises(CtcInfeasible):
        ctc_loss_grad(lp, np.array([0, 1, 2]), blank=3)


def test_ctc_feasible_length():
    assert ctc_feasible_length(np.array([], dtype=np.int64)) == 0
    assert ctc_feasible_length(np.array([4])) == 1
    assert ctc_feasible_length(np.array([1, 1])) == 3
    assert ctc_feasible_length(np.array([1, 2, 2, 2])) == 6


# ---------------------------------------------------------------------------
# raster + levenshtein


@needs_numba
def test_raster_backends_bitwise():
    rng = make_rng(14)
    segs = rng.uniform(2, 50, size=(40, 5))
    segs[:, 4] = rng.uniform(0.8, 2.0, size=40)
    a = numpy_impl.raster_segments(32, 64, segs, 1.0)
    b = numba_impl.raster_segments(32, 64, segs, 1.0)
    assert a.dtype == np.float32 and b.dtype == np.float32
    assert np.array_equal(a, b)


def test_raster_point_coverage():
    # a zero-length segment is a dot: full coverage at its center pixel
    segs = np.array([[8.5, 8.5, 8.5, 8.5, 2.0]])
    img = numpy_impl.raster_segments(16, 16, segs, 1.0)
    assert img[8, 8] == 1.0
    assert img[0, 0] == 0.0


def test_levenshtein_matches_reference():
    rng = make_rng(15)
    for _ in range(200):
        n, m = int(rng.integers(0, 12)), int(rng.integers(0, 12))
        a = rng.integers(0, 5, size=n)
        b = rng.integers(0, 5, size=m)
        assert levenshtein(a, b) == lev_ref(a, b)


def test_levenshtein_strings():
    assert levenshtein("kitten", "sitting") == 3
    assert levenshtein("", "abc") == 3
    assert levenshtein("abc", "abc") == 0
