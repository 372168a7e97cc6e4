"""Column-latent beta-VAE image tokenizer.

Encodes fixed-height ink images into a w-long sequence of h*c latent
column vectors (f = 8 pixels per column with the default three stride-2
stages plus the latent head) and decodes generated columns back to
pixels.  Internally images live in ink space: x = (255 - pixel) / 255,
so white background is exactly 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ErukuError, InvalidInput, ShapeError
from .fontsynth.dataset import DatasetManifest, load_png
from .fontsynth.render import TextImage
from .kernels import conv2d_backward, conv2d_forward
from .nn import AdamW
from .rngutil import make_rng


@dataclass
class VaeConfig:
    height_px: int = 64
    channels: tuple = (32, 64, 96)  # one stride-2 stage per entry
    latent_c: int = 1
    beta: float = 1e-5

    @property
    def f(self) -> int:
        return 2 ** len(self.channels)

    @property
    def latent_h(self) -> int:
        return self.height_px // self.f

    @property
    def column_dim(self) -> int:
        return self.latent_h * self.latent_c

    def to_dict(self) -> dict:
        return {
            "height_px": self.height_px,
            "channels": list(self.channels),
            "latent_c": self.latent_c,
            "beta": self.beta,
        }

    @staticmethod
    def from_dict(d: dict) -> "VaeConfig":
        return VaeConfig(
            height_px=d["height_px"],
            channels=tuple(d["channels"]),
            latent_c=d["latent_c"],
            beta=d["beta"],
        )


@dataclass
class LatentColumnSeq:
    columns: np.ndarray  # (w, h*c), float32
    width: int

    def __post_init__(self):
        if self.columns.ndim != 2 or self.columns.shape[0] != self.width:
            raise ShapeError(f"columns shape {self.columns.shape} != (width={self.width}, dim)")
        if self.width < 1:
            raise InvalidInput("latent sequence must have width >= 1")
        if not np.all(np.isfinite(self.columns)):
            raise InvalidInput("latent columns must be finite")


def init_params(cfg: VaeConfig, seed: int = 0) -> dict[str, np.ndarray]:
    rng = make_rng(seed, 0x564145)
    p: dict[str, np.ndarray] = {}

    def conv(name, cin, cout):
        std = math.sqrt(1.0 / (cin * 9))
        p[f"{name}/w"] = rng.normal(0.0, std, size=(cout, cin, 3, 3)).astype(np.float32)
        p[f"{name}/b"] = np.zeros(cout, dtype=np.float32)

    cin = 1
    for i, ch in enumerate(cfg.channels):
        conv(f"enc{i}", cin, ch)
        cin = ch
    conv("enc_head", cin, 2 * cfg.latent_c)

    conv("dec_in", cfg.latent_c, cfg.channels[-1])
    rev = list(reversed(cfg.channels))
    for i in range(len(rev) - 1):
        conv(f"dec{i}", rev[i], rev[i + 1])
    conv("dec_out", cfg.channels[0], 1)
    return p


def _silu(x):
    s = 1.0 / (1.0 + np.exp(-x))
    return x * s, (x, s)


def _silu_bwd(dy, cache):
    x, s = cache
    return dy * (s * (1.0 + x * (1.0 - s)))


def _up2(x):
    return np.repeat(np.repeat(x, 2, axis=2), 2, axis=3)


def _up2_bwd(dy):
    b, c, h, w = dy.shape
    return dy.reshape(b, c, h // 2, 2, w // 2, 2).sum(axis=(3, 5))


def encoder_fwd(x, params, cfg: VaeConfig):
    """x: (B, 1, H, W) ink floats -> (mu, logvar, cache)."""
    h = x
    caches = []
    for i in range(len(cfg.channels)):
        w, b = params[f"enc{i}/w"], params[f"enc{i}/b"]
        y = conv2d_forward(h, w, b, 2, 2, 1, 1)
        a, sc = _silu(y)
        caches.append((h, w, sc))
        h = a
    w, b = params["enc_head/w"], params["enc_head/b"]
    out = conv2d_forward(h, w, b, 1, 1, 1, 1)
    caches.append((h, w, None))
    c = cfg.latent_c
    return out[:, :c], out[:, c:], caches


def encoder_bwd(dmu, dlogvar, caches, params, cfg: VaeConfig):
    grads = {}
    dout = np.concatenate([dmu, dlogvar], axis=1)
    h, w, _ = caches[-1]
    dh, dw, db = conv2d_backward(h, w, dout, 1, 1, 1, 1)
    grads["enc_head/w"], grads["enc_head/b"] = dw, db
    for i in reversed(range(len(cfg.channels))):
        hin, w, sc = caches[i]
        dy = _silu_bwd(dh, sc)
        dh, dw, db = conv2d_backward(hin, w, dy, 2, 2, 1, 1)
        grads[f"enc{i}/w"], grads[f"enc{i}/b"] = dw, db
    return dh, grads


def decoder_fwd(z, params, cfg: VaeConfig):
    """z: (B, c, h, w) -> (xhat (B,1,H,W), cache)."""
    caches = []
    w, b = params["dec_in/w"], params["dec_in/b"]
    y = conv2d_forward(z, w, b, 1, 1, 1, 1)
    a, sc = _silu(y)
    caches.append((z, w, sc, False))
    h = a
    rev = list(reversed(cfg.channels))
    for i in range(len(rev) - 1):
        hu = _up2(h)
        w, b = params[f"dec{i}/w"], params[f"dec{i}/b"]
        y = conv2d_forward(hu, w, b, 1, 1, 1, 1)
        a, sc = _silu(y)
        caches.append((hu, w, sc, True))
        h = a
    hu = _up2(h)
    w, b = params["dec_out/w"], params["dec_out/b"]
    xhat = conv2d_forward(hu, w, b, 1, 1, 1, 1)
    caches.append((hu, w, None, True))
    return xhat, caches


def decoder_bwd(dxhat, caches, params, cfg: VaeConfig):
    grads = {}
    hu, w, _, up = caches[-1]
    dh, dw, db = conv2d_backward(hu, w, dxhat, 1, 1, 1, 1)
    grads["dec_out/w"], grads["dec_out/b"] = dw, db
    if up:
        dh = _up2_bwd(dh)
    rev = list(reversed(cfg.channels))
    for i in reversed(range(len(rev) - 1)):
        hu, w, sc, up = caches[1 + i]
        dy = _silu_bwd(dh, sc)
        dh, dw, db = conv2d_backward(hu, w, dy, 1, 1, 1, 1)
        grads[f"dec{i}/w"], grads[f"dec{i}/b"] = dw, db
        if up:
            dh = _up2_bwd(dh)
    z, w, sc, _ = caches[0]
    dy = _silu_bwd(dh, sc)
    dz, dw, db = conv2d_backward(z, w, dy, 1, 1, 1, 1)
    grads["dec_in/w"], grads["dec_in/b"] = dw, db
    return dz, grads


def pixels_to_ink(pixels: np.ndarray) -> np.ndarray:
    return ((255.0 - pixels.astype(np.float32)) / 255.0).astype(np.float32)


def ink_to_pixels(x: np.ndarray) -> np.ndarray:
    return np.rint(255.0 * (1.0 - np.clip(x, 0.0, 1.0))).astype(np.uint8)


def _check_image(pixels: np.ndarray, cfg: VaeConfig) -> None:
    if pixels.ndim != 2:
        raise ShapeError(f"expected (H, W) image, got shape {pixels.shape}")
    h, w = pixels.shape
    if h != cfg.height_px:
        raise ShapeError(f"image height {h} != configured {cfg.height_px}")
    if w < cfg.f or w % cfg.f:
        raise ShapeError(f"image width {w} must be a positive multiple of {cfg.f}")


def encode(
    image: TextImage | np.ndarray,
    params: dict,
    cfg: VaeConfig,
    deterministic: bool = True,
    rng=None,
) -> LatentColumnSeq:
    """Posterior mean (deterministic) or a sampled z, as latent columns."""
    pixels = image.pixels if isinstance(image, TextImage) else image
    _check_image(pixels, cfg)
    x = pixels_to_ink(pixels)[None, None]
    mu, logvar, _ = encoder_fwd(x, params, cfg)
    if deterministic:
        z = mu
    else:
        if rng is None:
            raise InvalidInput("stochastic encode requires an rng")
        z = mu + np.exp(0.5 * logvar) * rng.standard_normal(mu.shape).astype(np.float32)
    b, c, h, w = z.shape
    cols = z[0].transpose(2, 0, 1).reshape(w, c * h)
    return LatentColumnSeq(columns=np.ascontiguousarray(cols), width=w)


def columns_to_grid(cols: np.ndarray, cfg: VaeConfig) -> np.ndarray:
    w, d = cols.shape
    if d != cfg.column_dim:
        raise ShapeError(f"column dim {d} != {cfg.column_dim}")
    return cols.reshape(w, cfg.latent_c, cfg.latent_h).transpose(1, 2, 0)[None]


def decode(columns: LatentColumnSeq, params: dict, cfg: VaeConfig) -> TextImage:
    if columns.width == 0 or columns.columns.size == 0:
        raise InvalidInput("cannot decode an empty latent sequence")
    z = columns_to_grid(columns.columns.astype(np.float32), cfg)
    xhat, _ = decoder_fwd(z, params, cfg)
    pixels = ink_to_pixels(xhat[0, 0])
    return TextImage(pixels=pixels, height_px=pixels.shape[0], width_px=pixels.shape[1])


def kl_elements(mu: np.ndarray, logvar: np.ndarray) -> np.ndarray:
    return 0.5 * (mu * mu + np.exp(logvar) - logvar - 1.0)


def vae_loss_and_grads(x, params, cfg: VaeConfig, rng, stochastic=True):
    """Full loss = MSE(xhat, x) + beta * mean KL, with parameter grads."""
    mu, logvar, enc_cache = encoder_fwd(x, params, cfg)
    if stochastic:
        eps = rng.standard_normal(mu.shape).astype(x.dtype)
    else:
        eps = np.zeros_like(mu)
    sigma = np.exp(0.5 * logvar)
    z = mu + sigma * eps
    xhat, dec_cache = decoder_fwd(z, params, cfg)

    n_pix = x.size
    n_lat = mu.size
    diff = xhat - x
    mse = float((diff * diff).sum()) / n_pix
    kl = float(kl_elements(mu, logvar).sum()) / n_lat
    loss = mse + cfg.beta * kl

    dxhat = (2.0 / n_pix) * diff
    dz, dec_grads = decoder_bwd(dxhat, dec_cache, params, cfg)
    dmu = dz + (cfg.beta / n_lat) * mu
    dlogvar = dz * eps * 0.5 * sigma + (cfg.beta / n_lat) * 0.5 * (np.exp(logvar) - 1.0)
    _, enc_grads = encoder_bwd(dmu, dlogvar, enc_cache, params, cfg)

    grads = {**enc_grads, **dec_grads}
    return loss, mse, kl, grads


def psnr(a_ink: np.ndarray, b_ink: np.ndarray) -> float:
    mse = float(np.mean((a_ink.astype(np.float64) - b_ink.astype(np.float64)) ** 2))
    if mse == 0:
        return float("inf")
    return -10.0 * math.log10(mse)


@dataclass
class VaeTrainConfig:
    beta: float = 1e-5
    lr: float = 1e-3
    steps: int = 3000
    batch: int = 16
    crop_w: int = 64
    seed: int = 0
    log_every: int = 200
    log_fn: object = None


def _crop_batch(images: list[np.ndarray], idxs, crop_w: int, rng) -> np.ndarray:
    out = []
    for i in idxs:
        img = images[int(i)]
        h, w = img.shape
        if w >= crop_w:
            x0 = int(rng.integers(0, w - crop_w + 1))
            patch = img[:, x0 : x0 + crop_w]
        else:
            patch = np.full((h, crop_w), 255, dtype=np.uint8)
            patch[:, :w] = img
        out.append(pixels_to_ink(patch))
    return np.stack(out)[:, None]


def train_vae(manifest: DatasetManifest, cfg: VaeConfig, tcfg: VaeTrainConfig):
    """Train on random crops of the manifest's images; returns (params, log)."""
    if not manifest.records:
        raise InvalidInput("dataset is empty")
    cfg.beta = tcfg.beta
    root = manifest.path.parent
    images = []
    for rec in manifest.records:
        images.append(load_png(root / rec["style_image_path"]))
        images.append(load_png(root / rec["gen_image_path"]))
    params = init_params(cfg, seed=tcfg.seed)
    opt = AdamW(params, lr=tcfg.lr, weight_decay=0.0)
    rng = make_rng(tcfg.seed, 0x564154)
    log = []
    for step in range(tcfg.steps):
        idxs = rng.integers(0, len(images), size=tcfg.batch)
        x = _crop_batch(images, idxs, tcfg.crop_w, rng)
        loss, mse, kl, grads = vae_loss_and_grads(x, params, cfg, rng, stochastic=True)
        if not math.isfinite(loss):
            raise ErukuError(f"non-finite VAE loss at step {step}")
        opt.step(grads)
        if step % tcfg.log_every == 0 or step == tcfg.steps - 1:
            log.append({"step": step, "loss": loss, "mse": mse, "kl": kl})
            if tcfg.log_fn:
                tcfg.log_fn({"event": "vae_train", **log[-1]})
    return params, log


def latent_stats(images: list[np.ndarray], params: dict, cfg: VaeConfig):
    """Per-dimension mean/std of deterministic latent columns.

    The AR model regresses whitened columns; these stats freeze into its
    checkpoint after VAE training.
    """
    cols = []
    for img in images:
        cols.append(encode(img, params, cfg, deterministic=True).columns)
    allc = np.concatenate(cols, axis=0).astype(np.float64)
    mu = allc.mean(axis=0)
    sd = allc.std(axis=0)
    sd = np.maximum(sd, 1e-6)
    return mu.astype(np.float32), sd.astype(np.float32)


@dataclass
class VaeBundle:
    """Frozen tokenizer: weights plus the whitening stats the AR side uses."""

    params: dict
    cfg: VaeConfig
    lat_mu: np.ndarray  # (column_dim,)
    lat_sd: np.ndarray  # (column_dim,)

    def encode_norm(self, image) -> np.ndarray:
        cols = encode(image, self.params, self.cfg, deterministic=True).columns
        return ((cols - self.lat_mu) / self.lat_sd).astype(np.float32)

    def decode_norm(self, cols_norm: np.ndarray) -> TextImage:
        cols = np.asarray(cols_norm, dtype=np.float32) * self.lat_sd + self.lat_mu
        return decode(LatentColumnSeq(columns=cols, width=cols.shape[0]), self.params, self.cfg)
