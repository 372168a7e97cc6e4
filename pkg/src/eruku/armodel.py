"""Autoregressive encoder-decoder over latent columns.

A byte-token transformer encoder conditions a causal decoder that runs
over a tape of projected latent columns bracketed by learned special
embeddings.  Each decoder position emits a 3-way token-type
classification (SOG=0, IMG=1, EOG=2) and a regressed latent column;
training is teacher-forced with CE over every position plus MSE at IMG
positions.  The model regresses whitened columns; the whitening stats
live in the checkpoint next to the weights.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import ErukuError, InvalidInput, ShapeError
from .nn import ops
from .nn.attention import mha_bwd, mha_fwd, mha_project_kv, mha_step
from .rngutil import make_rng
from .textcodec import PAD, TextTokenSeq, encode_text, make_unconditional

TYPE_SOG = 0
TYPE_IMG = 1
TYPE_EOG = 2


@dataclass
class ArConfig:
    dim: int = 128
    n_heads: int = 4
    enc_layers: int = 4
    dec_layers: int = 4
    ffn_mult: int = 4
    col_dim: int = 8
    vocab: int = 260
    max_len: int = 4096

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "n_heads": self.n_heads,
            "enc_layers": self.enc_layers,
            "dec_layers": self.dec_layers,
            "ffn_mult": self.ffn_mult,
            "col_dim": self.col_dim,
            "vocab": self.vocab,
            "max_len": self.max_len,
        }

    @staticmethod
    def from_dict(d: dict) -> "ArConfig":
        return ArConfig(**d)


def init_params(cfg: ArConfig, seed: int = 0) -> dict[str, np.ndarray]:
    rng = make_rng(seed, 0x41524D)
    d, fd = cfg.dim, cfg.dim * cfg.ffn_mult
    p: dict[str, np.ndarray] = {}

    def w(name, *shape):
        p[name] = rng.normal(0.0, 0.02, size=shape).astype(np.float32)

    def zeros(name, *shape):
        p[name] = np.zeros(shape, dtype=np.float32)

    def ln(prefix):
        p[f"{prefix}/g"] = np.ones(d, dtype=np.float32)
        zeros(f"{prefix}/b", d)

    def attn(prefix):
        for n in ("wq", "wk", "wv", "wo"):
            w(f"{prefix}/{n}", d, d)
        for n in ("bq", "bk", "bv", "bo"):
            zeros(f"{prefix}/{n}", d)

    def ffn(prefix):
        w(f"{prefix}/w1", d, fd)
        zeros(f"{prefix}/b1", fd)
        w(f"{prefix}/w2", fd, d)
        zeros(f"{prefix}/b2", d)

    w("tok_emb", cfg.vocab, d)
    w("in_proj/w", cfg.col_dim, d)
    zeros("in_proj/b", d)
    w("e_sos", d)
    w("e_sog", d)
    w("e_eog", d)
    for i in range(cfg.enc_layers):
        ln(f"enc{i}/ln1")
        attn(f"enc{i}/attn")
        ln(f"enc{i}/ln2")
        ffn(f"enc{i}/ffn")
    if cfg.enc_layers:
        ln("enc_ln")
    for i in range(cfg.dec_layers):
        ln(f"dec{i}/ln1")
        attn(f"dec{i}/self")
        ln(f"dec{i}/ln2")
        attn(f"dec{i}/cross")
        ln(f"dec{i}/ln3")
        ffn(f"dec{i}/ffn")
    if cfg.dec_layers:
        ln("dec_ln")
    w("type_head/w", d, 3)
    zeros("type_head/b", 3)
    w("lat_head/w", d, cfg.col_dim)
    zeros("lat_head/b", cfg.col_dim)
    return p


# ---------------------------------------------------------------------------
# tape construction


@dataclass
class DecoderTape:
    """Per-sample decoder input embeddings with position origins."""

    embeddings: np.ndarray  # (T, D)
    origins: list[str]  # SOS | STYLE_COL | SOG | GEN_COL | EOG_PAD


def project_columns(cols: np.ndarray, params: dict) -> np.ndarray:
    if cols.ndim != 2 or cols.shape[1] != params["in_proj/w"].shape[0]:
        raise ShapeError(
            f"columns shape {cols.shape} incompatible with projection "
            f"{params['in_proj/w'].shape}"
        )
    return cols.astype(params["in_proj/w"].dtype) @ params["in_proj/w"] + params["in_proj/b"]


def build_tape(style_cols, gen_cols, params: dict) -> DecoderTape:
    """Inference tape [SOS, style, SOG] or teacher-forcing tape with gen cols."""
    d = params["e_sos"].shape[0]
    parts = [params["e_sos"][None]]
    origins = ["SOS"]
    if style_cols is not None and len(style_cols):
        parts.append(project_columns(np.asarray(style_cols), params))
        origins += ["STYLE_COL"] * len(style_cols)
    parts.append(params["e_sog"][None])
    origins.append("SOG")
    if gen_cols is not None and len(gen_cols):
        parts.append(project_columns(np.asarray(gen_cols), params))
        origins += ["GEN_COL"] * len(gen_cols)
    emb = np.concatenate(parts, axis=0)
    if emb.shape[1] != d:
        raise ShapeError(f"tape dim {emb.shape[1]} != {d}")
    return DecoderTape(embeddings=emb, origins=origins)


def pad_token_batch(seqs: list[TextTokenSeq]) -> np.ndarray:
    t_max = max(len(s) for s in seqs)
    ids = np.full((len(seqs), t_max), PAD, dtype=np.int64)
    for i, s in enumerate(seqs):
        ids[i, : len(s)] = s.tokens
    return ids


# ---------------------------------------------------------------------------
# transformer blocks


def _attn_params(params, prefix):
    return tuple(params[f"{prefix}/{n}"] for n in ("wq", "bq", "wk", "bk", "wv", "bv", "wo", "bo"))


def _block_fwd(params, prefix, x, kv, mask, n_heads, ln_name):
    """Pre-LN residual attention: x + attn(LN(x), kv)."""
    h, ln_cache = ops.layernorm_fwd(x, params[f"{ln_name}/g"], params[f"{ln_name}/b"])
    kv_in = h if kv is None else kv
    y, attn_cache = mha_fwd(h, kv_in, *_attn_params(params, prefix), n_heads, mask)
    return x + y, (ln_cache, attn_cache, kv is None)


def _block_bwd(dy, cache, params, prefix, ln_name, grads):
    ln_cache, attn_cache, self_attn = cache
    dxq, dxkv, aw = mha_bwd(dy, attn_cache)
    for n, g in zip(("wq", "bq", "wk", "bk", "wv", "bv", "wo", "bo"), aw):
        grads[f"{prefix}/{n}"] = grads.get(f"{prefix}/{n}", 0) + g
    dkv_ext = None
    if self_attn:
        dh = dxq + dxkv
    else:
        dh = dxq
        dkv_ext = dxkv
    dx_ln, dg, db = ops.layernorm_bwd(dh, ln_cache)
    grads[f"{ln_name}/g"] = grads.get(f"{ln_name}/g", 0) + dg
    grads[f"{ln_name}/b"] = grads.get(f"{ln_name}/b", 0) + db
    return dy + dx_ln, dkv_ext


def _ffn_fwd(params, prefix, x, ln_name):
    h, ln_cache = ops.layernorm_fwd(x, params[f"{ln_name}/g"], params[f"{ln_name}/b"])
    a, c1 = ops.linear_fwd(h, params[f"{prefix}/w1"], params[f"{prefix}/b1"])
    s, c2 = ops.silu_fwd(a)
    y, c3 = ops.linear_fwd(s, params[f"{prefix}/w2"], params[f"{prefix}/b2"])
    return x + y, (ln_cache, c1, c2, c3)


def _ffn_bwd(dy, cache, params, prefix, ln_name, grads):
    ln_cache, c1, c2, c3 = cache
    ds, dw2, db2 = ops.linear_bwd(dy, c3)
    da = ops.silu_bwd(ds, c2)
    dh, dw1, db1 = ops.linear_bwd(da, c1)
    grads[f"{prefix}/w1"] = grads.get(f"{prefix}/w1", 0) + dw1
    grads[f"{prefix}/b1"] = grads.get(f"{prefix}/b1", 0) + db1
    grads[f"{prefix}/w2"] = grads.get(f"{prefix}/w2", 0) + dw2
    grads[f"{prefix}/b2"] = grads.get(f"{prefix}/b2", 0) + db2
    dx_ln, dg, db = ops.layernorm_bwd(dh, ln_cache)
    grads[f"{ln_name}/g"] = grads.get(f"{ln_name}/g", 0) + dg
    grads[f"{ln_name}/b"] = grads.get(f"{ln_name}/b", 0) + db
    return dy + dx_ln


def _positions(t_len, cfg, dtype):
    if t_len > cfg.max_len:
        raise ShapeError(f"sequence length {t_len} exceeds max_len {cfg.max_len}")
    return ops.sinusoid_positions(t_len, cfg.dim, dtype=dtype)


def encoder_fwd(params, cfg: ArConfig, ids: np.ndarray):
    """ids: (B, Ts) int64 with PAD padding -> (memory, enc_mask, cache)."""
    emb, emb_cache = ops.embedding_fwd(params["tok_emb"], ids)
    x = emb + _positions(ids.shape[1], cfg, emb.dtype)
    # -inf on PAD keys so padding never receives attention
    neg = np.array(-np.inf, dtype=x.dtype)
    enc_mask = np.where(ids[:, None, None, :] == PAD, neg, x.dtype.type(0.0))
    caches = []
    for i in range(cfg.enc_layers):
        x, c1 = _block_fwd(params, f"enc{i}/attn", x, None, enc_mask, cfg.n_heads, f"enc{i}/ln1")
        x, c2 = _ffn_fwd(params, f"enc{i}/ffn", x, f"enc{i}/ln2")
        caches.append((c1, c2))
    ln_cache = None
    if cfg.enc_layers:
        x, ln_cache = ops.layernorm_fwd(x, params["enc_ln/g"], params["enc_ln/b"])
    return x, enc_mask, (emb_cache, caches, ln_cache)


def encoder_bwd(dmem, cache, params, cfg: ArConfig, grads):
    emb_cache, caches, ln_cache = cache
    dx = dmem
    if cfg.enc_layers:
        dx, dg, db = ops.layernorm_bwd(dx, ln_cache)
        grads["enc_ln/g"] = grads.get("enc_ln/g", 0) + dg
        grads["enc_ln/b"] = grads.get("enc_ln/b", 0) + db
    for i in reversed(range(cfg.enc_layers)):
        c1, c2 = caches[i]
        dx = _ffn_bwd(dx, c2, params, f"enc{i}/ffn", f"enc{i}/ln2", grads)
        dx, _ = _block_bwd(dx, c1, params, f"enc{i}/attn", f"enc{i}/ln1", grads)
    grads["tok_emb"] = grads.get("tok_emb", 0) + ops.embedding_bwd(dx, emb_cache)


def causal_mask(t_len: int, dtype) -> np.ndarray:
    m = np.zeros((1, 1, t_len, t_len), dtype=dtype)
    iu = np.triu_indices(t_len, k=1)
    m[0, 0][iu] = -np.inf
    return m


def decoder_fwd(params, cfg: ArConfig, tape: np.ndarray, memory, enc_mask):
    """tape: (B, T, D) embeddings -> (type_logits, latents, cache)."""
    x = tape + _positions(tape.shape[1], cfg, tape.dtype)
    cmask = causal_mask(tape.shape[1], x.dtype)
    xmask = enc_mask  # (B, 1, 1, Tk) broadcasts over query positions
    caches = []
    for i in range(cfg.dec_layers):
        x, c1 = _block_fwd(params, f"dec{i}/self", x, None, cmask, cfg.n_heads, f"dec{i}/ln1")
        x, c2 = _block_fwd(params, f"dec{i}/cross", x, memory, xmask, cfg.n_heads, f"dec{i}/ln2")
        x, c3 = _ffn_fwd(params, f"dec{i}/ffn", x, f"dec{i}/ln3")
        caches.append((c1, c2, c3))
    ln_cache = None
    if cfg.dec_layers:
        x, ln_cache = ops.layernorm_fwd(x, params["dec_ln/g"], params["dec_ln/b"])
    type_logits, tc = ops.linear_fwd(x, params["type_head/w"], params["type_head/b"])
    latents, lc = ops.linear_fwd(x, params["lat_head/w"], params["lat_head/b"])
    return type_logits, latents, (caches, ln_cache, tc, lc)


def decoder_bwd(dtype_logits, dlatents, cache, params, cfg: ArConfig, grads):
    caches, ln_cache, tc, lc = cache
    dx1, dw, db = ops.linear_bwd(dtype_logits, tc)
    grads["type_head/w"] = grads.get("type_head/w", 0) + dw
    grads["type_head/b"] = grads.get("type_head/b", 0) + db
    dx2, dw, db = ops.linear_bwd(dlatents, lc)
    grads["lat_head/w"] = grads.get("lat_head/w", 0) + dw
    grads["lat_head/b"] = grads.get("lat_head/b", 0) + db
    dx = dx1 + dx2
    if cfg.dec_layers:
        dx, dg, db = ops.layernorm_bwd(dx, ln_cache)
        grads["dec_ln/g"] = grads.get("dec_ln/g", 0) + dg
        grads["dec_ln/b"] = grads.get("dec_ln/b", 0) + db
    dmem = 0
    for i in reversed(range(cfg.dec_layers)):
        c1, c2, c3 = caches[i]
        dx = _ffn_bwd(dx, c3, params, f"dec{i}/ffn", f"dec{i}/ln3", grads)
        dx, dm = _block_bwd(dx, c2, params, f"dec{i}/cross", f"dec{i}/ln2", grads)
        dmem = dmem + dm
        dx, _ = _block_bwd(dx, c1, params, f"dec{i}/self", f"dec{i}/ln1", grads)
    return dx, dmem


def forward(params, cfg: ArConfig, tape: np.ndarray, token_seqs: list[TextTokenSeq]):
    """Full forward over a batch: tape (B, T, D), one text per batch row.

    Returns (type_logits (B, T, 3), latents (B, T, col_dim)).
    """
    ids = pad_token_batch(token_seqs)
    memory, enc_mask, _ = encoder_fwd(params, cfg, ids)
    type_logits, latents, _ = decoder_fwd(params, cfg, tape, memory, enc_mask)
    return type_logits, latents


# ---------------------------------------------------------------------------
# incremental decoding (inference)


class DecoderState:
    """KV cache for one batch of decode streams, advanced in lockstep."""

    def __init__(self, params, cfg: ArConfig, memory, enc_mask):
        self.params = params
        self.cfg = cfg
        self.memory = memory
        self.enc_mask = enc_mask
        self.pos = 0
        self.self_k = [None] * cfg.dec_layers
        self.self_v = [None] * cfg.dec_layers
        self.cross_kv = []
        for i in range(cfg.dec_layers):
            self.cross_kv.append(
                mha_project_kv(
                    memory,
                    params[f"dec{i}/cross/wk"],
                    params[f"dec{i}/cross/bk"],
                    params[f"dec{i}/cross/wv"],
                    params[f"dec{i}/cross/bv"],
                    cfg.n_heads,
                )
            )

    def step(self, emb: np.ndarray):
        """Advance one position. emb: (B, 1, D) tape embedding.

        Returns (type_logits (B, 3), latent (B, col_dim)).
        """
        p, cfg = self.params, self.cfg
        x = emb + _positions(self.pos + 1, cfg, emb.dtype)[self.pos][None, None]
        for i in range(cfg.dec_layers):
            h, _ = ops.layernorm_fwd(x, p[f"dec{i}/ln1/g"], p[f"dec{i}/ln1/b"])
            k_new, v_new = mha_project_kv(
                h, p[f"dec{i}/self/wk"], p[f"dec{i}/self/bk"],
                p[f"dec{i}/self/wv"], p[f"dec{i}/self/bv"], cfg.n_heads,
            )
            if self.self_k[i] is None:
                self.self_k[i], self.self_v[i] = k_new, v_new
            else:
                self.self_k[i] = np.concatenate([self.self_k[i], k_new], axis=2)
                self.self_v[i] = np.concatenate([self.self_v[i], v_new], axis=2)
            y = mha_step(
                h, self.self_k[i], self.self_v[i],
                p[f"dec{i}/self/wq"], p[f"dec{i}/self/bq"],
                p[f"dec{i}/self/wo"], p[f"dec{i}/self/bo"], cfg.n_heads,
            )
            x = x + y
            h, _ = ops.layernorm_fwd(x, p[f"dec{i}/ln2/g"], p[f"dec{i}/ln2/b"])
            ck, cv = self.cross_kv[i]
            y = mha_step(
                h, ck, cv,
                p[f"dec{i}/cross/wq"], p[f"dec{i}/cross/bq"],
                p[f"dec{i}/cross/wo"], p[f"dec{i}/cross/bo"], cfg.n_heads,
                self.enc_mask,
            )
            x = x + y
            x, _ = _ffn_fwd(p, f"dec{i}/ffn", x, f"dec{i}/ln3")
        if cfg.dec_layers:
            x, _ = ops.layernorm_fwd(x, p["dec_ln/g"], p["dec_ln/b"])
        type_logits = (x @ p["type_head/w"] + p["type_head/b"])[:, 0]
        latent = (x @ p["lat_head/w"] + p["lat_head/b"])[:, 0]
        self.pos += 1
        return type_logits, latent


def start_decoder(params, cfg: ArConfig, token_seqs: list[TextTokenSeq]) -> DecoderState:
    ids = pad_token_batch(token_seqs)
    memory, enc_mask, _ = encoder_fwd(params, cfg, ids)
    return DecoderState(params, cfg, memory, enc_mask)


# ---------------------------------------------------------------------------
# training


@dataclass
class ArExample:
    style_text: str
    gen_text: str
    style_cols: np.ndarray  # whitened, (w_s, col_dim)
    gen_cols: np.ndarray  # whitened, (w_g, col_dim)


def assemble_batch(examples: list[ArExample], params, cfg: ArConfig, phase: int,
                   p_uncond: float, p_drop: float, rng, input_noise: float = 0.0):
    """Build padded tape, text batch, and targets for one bucketed batch.

    ``input_noise`` perturbs the column embeddings fed to the decoder
    (targets stay clean).  Free-running generation feeds back the model's
    own imperfect columns; a little Gaussian noise at training time makes
    the learned map contract toward the clean trajectory instead of
    compounding those errors.
    """
    w_s = examples[0].style_cols.shape[0]
    if any(ex.style_cols.shape[0] != w_s for ex in examples):
        raise InvalidInput("batch must share style width (bucketed)")
    b = len(examples)
    wgs = [ex.gen_cols.shape[0] for ex in examples]
    t_len = w_s + 2 + max(wgs)
    dtype = params["e_sos"].dtype

    token_seqs = []
    for ex in examples:
        style_text = ex.style_text
        if phase == 2 and p_drop > 0 and rng.random() < p_drop:
            style_text = None
        seq = encode_text(style_text, ex.gen_text)
        if p_uncond > 0 and rng.random() < p_uncond:
            seq = make_unconditional(seq)
        token_seqs.append(seq)

    tape = np.empty((b, t_len, cfg.dim), dtype=dtype)
    tape[:, 0] = params["e_sos"]
    tape[:, w_s + 1] = params["e_sog"]
    types = np.full((b, t_len), TYPE_EOG, dtype=np.int64)
    types[:, :w_s] = TYPE_IMG
    types[:, w_s] = TYPE_SOG
    lat_targets = np.zeros((b, t_len, cfg.col_dim), dtype=dtype)
    mse_mask = np.zeros((b, t_len), dtype=dtype)

    proj_cols = []
    proj_pos = []  # (sample, tape position)
    for i, ex in enumerate(examples):
        wg = wgs[i]
        for j in range(w_s):
            proj_cols.append(ex.style_cols[j])
            proj_pos.append((i, 1 + j))
        for j in range(wg):
            proj_cols.append(ex.gen_cols[j])
            proj_pos.append((i, w_s + 2 + j))
        if wg < max(wgs):
            tape[i, w_s + 2 + wg :] = params["e_eog"]
        types[i, w_s + 1 : w_s + 1 + wg] = TYPE_IMG
        lat_targets[i, :w_s] = ex.style_cols
        lat_targets[i, w_s + 1 : w_s + 1 + wg] = ex.gen_cols
        mse_mask[i, :w_s] = 1
        mse_mask[i, w_s + 1 : w_s + 1 + wg] = 1

    cols_arr = np.asarray(proj_cols, dtype=dtype).reshape(-1, cfg.col_dim)
    if input_noise > 0:
        cols_arr = cols_arr + input_noise * rng.standard_normal(cols_arr.shape).astype(dtype)
    proj = cols_arr @ params["in_proj/w"] + params["in_proj/b"]
    bi = np.array([p[0] for p in proj_pos])
    ti = np.array([p[1] for p in proj_pos])
    tape[bi, ti] = proj

    ce_w = np.ones((b, t_len), dtype=dtype)
    pad_mask = np.zeros((b, t_len), dtype=bool)
    for i in range(b):
        pad_mask[i, w_s + 2 + wgs[i] :] = True
    return token_seqs, tape, types, lat_targets, mse_mask, ce_w, (cols_arr, bi, ti, pad_mask)


def batch_loss_and_grads(examples, params, cfg: ArConfig, phase: int,
                         p_uncond: float, p_drop: float, rng, input_noise: float = 0.0,
                         scheduled_p: float = 0.0):
    """One teacher-forced batch: returns (loss, ce, mse, type_acc, grads).

    ``scheduled_p`` is the scheduled-sampling rate: each generated-column
    input is replaced, with that probability, by the model's own pass-1
    prediction of it. Predictions are constants to the optimizer
    (stop-gradient), so the analytic gradients are exact for the loss
    actually minimized. Style-column inputs are never replaced; they are
    given at inference time too.
    """
    token_seqs, tape, types, lat_t, mse_m, ce_w, tape_info = assemble_batch(
        examples, params, cfg, phase, p_uncond, p_drop, rng, input_noise
    )
    b, t_len = types.shape
    ids = pad_token_batch(token_seqs)
    memory, enc_mask, enc_cache = encoder_fwd(params, cfg, ids)
    if scheduled_p > 0:
        cols_arr, bi, ti, pad_mask = tape_info
        _, lat0, _ = decoder_fwd(params, cfg, tape, memory, enc_mask)
        w_s0 = examples[0].style_cols.shape[0]
        # a column input at tape position t is predicted from position t-1
        swap = (ti >= w_s0 + 2) & (rng.random(ti.shape) < scheduled_p)
        if swap.any():
            cols_arr = cols_arr.copy()
            cols_arr[swap] = lat0[bi[swap], ti[swap] - 1]
            tape[bi, ti] = cols_arr @ params["in_proj/w"] + params["in_proj/b"]
            tape_info = (cols_arr, bi, ti, pad_mask)
    type_logits, latents, dec_cache = decoder_fwd(params, cfg, tape, memory, enc_mask)

    # CE: per-sample mean over positions, then mean over samples
    ce_norm = ce_w / (b * ce_w.sum(axis=1, keepdims=True))
    ce, probs = ops.cross_entropy_fwd(
        type_logits.reshape(-1, 3), types.reshape(-1), ce_norm.reshape(-1)
    )
    # MSE: per-sample mean over IMG positions and dims, then mean over samples
    mse_norm = mse_m / (b * cfg.col_dim * mse_m.sum(axis=1, keepdims=True))
    diff = latents - lat_t
    mse = float((mse_norm[..., None] * diff * diff).sum())
    loss = ce + mse

    pred = type_logits.argmax(axis=-1)
    type_acc = float((pred == types).mean())

    dlogits = ops.cross_entropy_bwd(probs, types.reshape(-1), ce_norm.reshape(-1))
    dlogits = dlogits.reshape(b, t_len, 3)
    dlat = 2.0 * mse_norm[..., None] * diff

    grads: dict[str, np.ndarray] = {}
    dtape, dmem = decoder_bwd(dlogits, dlat, dec_cache, params, cfg, grads)
    encoder_bwd(dmem, enc_cache, params, cfg, grads)

    cols_arr, bi, ti, pad_mask = tape_info
    dproj = dtape[bi, ti]
    grads["in_proj/w"] = grads.get("in_proj/w", 0) + cols_arr.T @ dproj
    grads["in_proj/b"] = grads.get("in_proj/b", 0) + dproj.sum(axis=0)
    grads["e_sos"] = grads.get("e_sos", 0) + dtape[:, 0].sum(axis=0)
    w_s = examples[0].style_cols.shape[0]
    grads["e_sog"] = grads.get("e_sog", 0) + dtape[:, w_s + 1].sum(axis=0)
    grads["e_eog"] = grads.get("e_eog", 0) + dtape[pad_mask].sum(axis=0)

    for k, v in params.items():
        if k not in grads:
            grads[k] = np.zeros_like(v)
        else:
            grads[k] = np.asarray(grads[k], dtype=v.dtype)
    return loss, ce, mse, type_acc, grads


def train_step(batch, vae_bundle, params, cfg: ArConfig, mode: str,
               p_uncond: float, p_drop: float, rng):
    """Teacher-forced step on SamplePairs; returns {"ce": ..., "mse": ...}.

    Thin wrapper over batch_loss_and_grads for callers holding raw
    SamplePairs; the train loop precomputes ArExamples instead.
    """
    phase = 2 if mode == "phase2" else 1
    examples = [
        ArExample(
            style_text=p_.style_text,
            gen_text=p_.gen_text,
            style_cols=vae_bundle.encode_norm(p_.style_image.pixels),
            gen_cols=vae_bundle.encode_norm(p_.gen_image.pixels),
        )
        for p_ in batch
    ]
    loss, ce, mse, acc, grads = batch_loss_and_grads(
        examples, params, cfg, phase, p_uncond, p_drop, rng
    )
    if not math.isfinite(loss):
        raise ErukuError("non-finite loss in train_step")
    return {"ce": ce, "mse": mse, "loss": loss, "type_acc": acc, "grads": grads}


def clip_grads(grads: dict, max_norm: float) -> float:
    total = 0.0
    for k in sorted(grads):
        g = grads[k]
        total += float((g.astype(np.float64) ** 2).sum())
    norm = math.sqrt(total)
    if max_norm and norm > max_norm:
        scale = max_norm / norm
        for k in grads:
            grads[k] *= scale
    return norm


@dataclass
class ArTrainConfig:
    phase: int = 1
    steps: int = 1000
    batch: int = 16
    accum: int = 1
    lr: float = 1e-4
    lr_final: float | None = None  # set for cosine decay lr -> lr_final
    wd: float = 1e-2
    p_uncond: float = 0.1
    p_drop: float = 0.0
    input_noise: float = 0.0
    scheduled_p: float = 0.0  # final scheduled-sampling rate, ramped linearly from 0
    seed: int = 0
    clip: float = 1.0
    max_gen_cols: int = 0  # 0 = no cap; else skip over-long samples
    log_every: int = 50
    log_fn: object = None


def bucket_by_style_width(examples: list[ArExample]) -> dict[int, list[int]]:
    buckets: dict[int, list[int]] = {}
    for i, ex in enumerate(examples):
        buckets.setdefault(ex.style_cols.shape[0], []).append(i)
    return buckets


def train(examples: list[ArExample], params, cfg: ArConfig, tcfg: ArTrainConfig):
    """AdamW loop with style-width bucketing and gradient accumulation."""
    from .nn import AdamW

    if tcfg.max_gen_cols:
        examples = [ex for ex in examples if ex.gen_cols.shape[0] <= tcfg.max_gen_cols]
    if not examples:
        raise InvalidInput("no training examples")
    buckets = bucket_by_style_width(examples)
    keys = sorted(buckets)
    weights = np.array([len(buckets[k]) for k in keys], dtype=np.float64)
    weights /= weights.sum()
    opt = AdamW(params, lr=tcfg.lr, weight_decay=tcfg.wd)
    rng = make_rng(tcfg.seed, 0x41525452)
    log = []
    for step in range(tcfg.steps):
        frac = step / max(tcfg.steps - 1, 1)
        if tcfg.lr_final is not None:
            opt.lr = tcfg.lr_final + 0.5 * (tcfg.lr - tcfg.lr_final) * (1.0 + math.cos(math.pi * frac))
        acc_grads = None
        tot = {"loss": 0.0, "ce": 0.0, "mse": 0.0, "type_acc": 0.0}
        for _ in range(tcfg.accum):
            ws = keys[int(rng.choice(len(keys), p=weights))]
            pool = buckets[ws]
            idx = rng.integers(0, len(pool), size=min(tcfg.batch, len(pool)))
            batch = [examples[pool[int(i)]] for i in idx]
            loss, ce, mse, acc, grads = batch_loss_and_grads(
                batch, params, cfg, tcfg.phase, tcfg.p_uncond, tcfg.p_drop, rng,
                tcfg.input_noise, tcfg.scheduled_p * frac
            )
            if not math.isfinite(loss):
                raise ErukuError(f"non-finite AR loss at step {step}")
            if acc_grads is None:
                acc_grads = grads
            else:
                for k in acc_grads:
                    acc_grads[k] += grads[k]
            tot["loss"] += loss
            tot["ce"] += ce
            tot["mse"] += mse
            tot["type_acc"] += acc
        for k in acc_grads:
            acc_grads[k] /= tcfg.accum
        clip_grads(acc_grads, tcfg.clip)
        opt.step(acc_grads)
        if step % tcfg.log_every == 0 or step == tcfg.steps - 1:
            entry = {"step": step, **{k: v / tcfg.accum for k, v in tot.items()}}
            log.append(entry)
            if tcfg.log_fn:
                tcfg.log_fn({"event": "ar_train", "phase": tcfg.phase, **entry})
    return params, log
