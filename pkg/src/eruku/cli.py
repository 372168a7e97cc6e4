"""Command-line entry point: synth, train-vae, train-ar, generate, eval.

Exit codes: 0 success, 1 invalid arguments (usage printed), 2 runtime
failure.  Every run writes a JSON echo of its resolved config next to
its outputs.  Heavy imports happen inside handlers so that --threads
can pin BLAS/numba thread counts before numpy loads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path


class _Parser(argparse.ArgumentParser):
    # spec'd exit codes: argparse's default 2-on-usage-error becomes 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _logger(mode: str):
    def log(event: dict) -> None:
        if mode == "json":
            print(json.dumps(event, sort_keys=True), flush=True)
        else:
            kv = " ".join(f"{k}={v}" for k, v in event.items())
            print(kv, flush=True)

    return log


def _echo_config(path: Path, config: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _resolved(args, keys) -> dict:
    from .backend import resolve_backend

    out = {k: getattr(args, k.replace("-", "_")) for k in keys}
    out["backend"] = resolve_backend()
    return out


def _manifest_path(data: str) -> Path:
    p = Path(data)
    return p if p.suffix == ".jsonl" else p / "manifest.jsonl"


def _load_pairs(manifest):
    """Materialize SamplePairs (with images) from a manifest."""
    from .fontsynth import TextImage
    from .fontsynth.dataset import SamplePair, load_png

    root = manifest.path.parent
    pairs = []
    for rec in manifest.records:
        sp = load_png(root / rec["style_image_path"])
        gp = load_png(root / rec["gen_image_path"])
        pairs.append(
            SamplePair(
                style_text=rec["style_text"],
                gen_text=rec["gen_text"],
                style_image=TextImage(sp, sp.shape[0], sp.shape[1]),
                gen_image=TextImage(gp, gp.shape[0], gp.shape[1]),
                font_id=rec["font_id"],
                seed=rec["seed"],
            )
        )
    return pairs


def _prepare_examples(pairs, bundle):
    from .armodel import ArExample

    return [
        ArExample(
            style_text=p.style_text,
            gen_text=p.gen_text,
            style_cols=bundle.encode_norm(p.style_image.pixels),
            gen_cols=bundle.encode_norm(p.gen_image.pixels),
        )
        for p in pairs
    ]


def _load_vae_bundle(tensors, config):
    import numpy as np

    from .checkpoint import CheckpointError, section
    from .vae import VaeBundle, VaeConfig

    vcfg = VaeConfig.from_dict(config["vae"])
    vt = section(tensors, "vae.")
    if "lat_mu" not in vt or "lat_sd" not in vt:
        raise CheckpointError("checkpoint lacks latent whitening stats")
    lat_mu = vt.pop("lat_mu")
    lat_sd = vt.pop("lat_sd")
    return VaeBundle(params=vt, cfg=vcfg, lat_mu=np.asarray(lat_mu), lat_sd=np.asarray(lat_sd))


def _load_pipeline(path):
    from .armodel import ArConfig
    from .checkpoint import load_checkpoint, section

    config, tensors = load_checkpoint(path)
    bundle = _load_vae_bundle(tensors, config)
    ar_params = section(tensors, "ar.")
    ar_cfg = ArConfig.from_dict(config["ar"])
    return config, tensors, bundle, ar_params, ar_cfg


def cmd_synth(args, log) -> int:
    from .fontsynth import DatasetConfig, generate_dataset

    cfg = DatasetConfig(
        num_samples=args.num,
        num_fonts=args.fonts,
        phase=args.phase,
        height_px=args.height,
        out_dir=args.out,
        seed=args.seed,
    )
    manifest = generate_dataset(cfg)
    echo = _resolved(args, ["out", "num", "fonts", "phase", "height", "seed"])
    echo["corpus_hash"] = manifest.header["corpus_hash"]
    _echo_config(Path(args.out) / "config.json", echo)
    log({"event": "synth_done", "samples": len(manifest.records), "out": args.out})
    return 0


def cmd_train_vae(args, log) -> int:
    from .checkpoint import save_checkpoint, with_prefix
    from .fontsynth.dataset import load_manifest, load_png
    from .vae import VaeConfig, VaeTrainConfig, latent_stats, train_vae

    manifest = load_manifest(_manifest_path(args.data))
    vcfg = VaeConfig(height_px=manifest.header["height_px"], beta=args.beta)
    tcfg = VaeTrainConfig(
        beta=args.beta, lr=args.lr, steps=args.steps, batch=args.batch,
        crop_w=args.crop_w, seed=args.seed, log_fn=log,
    )
    params, _ = train_vae(manifest, vcfg, tcfg)
    root = manifest.path.parent
    stat_imgs = []
    for rec in manifest.records[:256]:
        stat_imgs.append(load_png(root / rec["style_image_path"]))
        stat_imgs.append(load_png(root / rec["gen_image_path"]))
    lat_mu, lat_sd = latent_stats(stat_imgs, params, vcfg)
    tensors = with_prefix(params, "vae.")
    tensors["vae.lat_mu"] = lat_mu
    tensors["vae.lat_sd"] = lat_sd
    config = {"vae": vcfg.to_dict()}
    save_checkpoint(args.out, config, tensors)
    echo = _resolved(args, ["data", "steps", "batch", "beta", "lr", "crop_w", "seed", "out"])
    _echo_config(Path(str(args.out) + ".config.json"), echo)
    log({"event": "train_vae_done", "out": str(args.out)})
    return 0


def cmd_train_ar(args, log) -> int:
    from .armodel import ArConfig, ArTrainConfig, init_params, train
    from .checkpoint import load_checkpoint, save_checkpoint, section, with_prefix
    from .fontsynth.dataset import load_manifest

    manifest = load_manifest(_manifest_path(args.data))
    vae_config, vae_tensors = load_checkpoint(args.vae)
    bundle = _load_vae_bundle(vae_tensors, vae_config)
    if args.init:
        init_config, init_tensors = load_checkpoint(args.init)
        ar_cfg = ArConfig.from_dict(init_config["ar"])
        ar_params = section(init_tensors, "ar.")
    else:
        ar_cfg = ArConfig(col_dim=bundle.cfg.column_dim)
        ar_params = init_params(ar_cfg, seed=args.seed)
    pairs = _load_pairs(manifest)
    examples = _prepare_examples(pairs, bundle)
    tcfg = ArTrainConfig(
        phase=args.phase, steps=args.steps, batch=args.batch, accum=args.accum,
        lr=args.lr, lr_final=args.lr_final, wd=args.wd, p_uncond=args.p_uncond,
        p_drop=args.p_drop, input_noise=args.input_noise,
        scheduled_p=args.scheduled_p,
        seed=args.seed, max_gen_cols=args.max_gen_cols, log_fn=log,
    )
    ar_params, _ = train(examples, ar_params, ar_cfg, tcfg)
    tensors = dict(vae_tensors)  # carry the frozen tokenizer forward
    tensors.update(with_prefix(ar_params, "ar."))
    config = dict(vae_config)
    config["ar"] = ar_cfg.to_dict()
    save_checkpoint(args.out, config, tensors)
    echo = _resolved(args, [
        "phase", "data", "vae", "steps", "batch", "accum", "lr", "lr_final", "wd",
        "p_uncond", "p_drop", "input_noise", "scheduled_p", "seed", "out", "init",
        "max_gen_cols",
    ])
    _echo_config(Path(str(args.out) + ".config.json"), echo)
    log({"event": "train_ar_done", "out": str(args.out)})
    return 0


def cmd_generate(args, log) -> int:
    from .fontsynth.dataset import _save_png, load_png
    from .genloop import GenConfig, generate_image

    _, _, bundle, ar_params, ar_cfg = _load_pipeline(args.ckpt)
    style = load_png(args.style_image)
    gcfg = GenConfig(gamma=args.gamma, max_cols=args.max_cols, max_extra_sog=args.max_extra_sog)
    img = generate_image(style, args.style_text, args.text, bundle, ar_params, ar_cfg, gcfg)
    _save_png(img.pixels, Path(args.out))
    echo = _resolved(args, [
        "ckpt", "style_image", "style_text", "text", "gamma", "max_cols", "seed", "out",
    ])
    _echo_config(Path(str(args.out) + ".config.json"), echo)
    log({"event": "generate_done", "out": str(args.out), "width_px": img.width_px})
    return 0


def cmd_train_eval(args, log) -> int:
    """Fit the eval-harness models (recognizer + stylenet) into a checkpoint."""
    from .checkpoint import load_checkpoint, save_checkpoint, with_prefix
    from .evalsuite import (
        RecConfig, RecTrainConfig, StyleNetConfig, StyleTrainConfig,
        train_recognizer, train_stylenet,
    )
    from .fontsynth.dataset import load_manifest, load_png

    manifest = load_manifest(_manifest_path(args.data))
    root = manifest.path.parent
    rec_samples = []
    style_samples = []
    n_fonts = 0
    for rec in manifest.records:
        gp = load_png(root / rec["gen_image_path"])
        sp = load_png(root / rec["style_image_path"])
        rec_samples.append((gp, rec["gen_text"]))
        rec_samples.append((sp, rec["style_text"]))
        style_samples.append((gp, rec["font_id"]))
        style_samples.append((sp, rec["font_id"]))
        n_fonts = max(n_fonts, rec["font_id"] + 1)
    h = manifest.header["height_px"]
    rcfg = RecConfig(height_px=h)
    rparams, _ = train_recognizer(
        rec_samples, rcfg,
        RecTrainConfig(steps=args.rec_steps, seed=args.seed, log_fn=log),
    )
    scfg = StyleNetConfig(height_px=h, n_fonts=n_fonts)
    sparams, _ = train_stylenet(
        style_samples, scfg,
        StyleTrainConfig(steps=args.style_steps, seed=args.seed, log_fn=log),
    )
    config, tensors = load_checkpoint(args.ckpt)
    tensors.update(with_prefix(rparams, "rec."))
    tensors.update(with_prefix(sparams, "style."))
    config["rec"] = rcfg.to_dict()
    config["style"] = scfg.to_dict()
    save_checkpoint(args.out, config, tensors)
    echo = _resolved(args, ["data", "ckpt", "rec_steps", "style_steps", "seed", "out"])
    _echo_config(Path(str(args.out) + ".config.json"), echo)
    log({"event": "train_eval_done", "out": str(args.out)})
    return 0


_PROTO_ALIAS = {
    "with": "with_style_text",
    "without": "without_style_text",
    "noisy": "noisy_style_text",
}


def cmd_eval(args, log) -> int:
    from .checkpoint import checkpoint_hash, section
    from .evalsuite import (
        EvalModels, EvalRunConfig, RecConfig, StyleNetConfig, eval_run,
        write_report_csv,
    )
    from .fontsynth.dataset import load_manifest

    config, tensors, bundle, ar_params, ar_cfg = _load_pipeline(args.ckpt)
    models = EvalModels(
        vae=bundle, ar_params=ar_params, ar_cfg=ar_cfg,
        rec_params=section(tensors, "rec."), rec_cfg=RecConfig.from_dict(config["rec"]),
        style_params=section(tensors, "style."), style_cfg=StyleNetConfig.from_dict(config["style"]),
    )
    manifest = load_manifest(_manifest_path(args.data))
    pairs = _load_pairs(manifest)
    if args.limit:
        pairs = pairs[: args.limit]
    cfg = EvalRunConfig(
        protocol=_PROTO_ALIAS.get(args.protocol, args.protocol),
        p_char_corrupt=args.noise, gamma=args.gamma, max_cols=args.max_cols,
        seed=args.seed,
    )
    report = eval_run(models, pairs, cfg, ckpt_hash=checkpoint_hash(args.ckpt))
    write_report_csv([report], args.report)
    echo = _resolved(args, [
        "ckpt", "data", "protocol", "noise", "gamma", "max_cols", "limit", "seed", "report",
    ])
    echo["ckpt_hash"] = report.ckpt_hash
    _echo_config(Path(str(args.report) + ".config.json"), echo)
    log({"event": "eval_done", **{k: getattr(report, k) for k in
         ("protocol", "hwd_proxy", "delta_cer", "fid_proxy", "bfid_proxy", "n_samples")}})
    return 0


def cmd_bench(args, log) -> int:
    from .bench import run_bench

    for row in run_bench(sizes=args.size, repeats=args.repeats, seed=args.seed):
        log(row)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="eruku", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=0, help="BLAS/numba thread cap (0 = leave as-is)")
    common.add_argument("--log", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--num", type=int, required=True)
    p.add_argument("--fonts", type=int, default=5)
    p.add_argument("--phase", type=int, choices=(1, 2), default=1)
    p.add_argument("--height", type=int, default=64)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("train-vae", parents=[common], help="train the column tokenizer")
    p.add_argument("--data", required=True)
    p.add_argument("--steps", type=int, default=3000)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--beta", type=float, default=1e-5)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--crop-w", type=int, default=64)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_train_vae)

    p = sub.add_parser("train-ar", parents=[common], help="train the autoregressive model")
    p.add_argument("--phase", type=int, choices=(1, 2), default=1)
    p.add_argument("--data", required=True)
    p.add_argument("--vae", required=True, help="checkpoint with vae.* tensors")
    p.add_argument("--init", default=None, help="continue from this AR checkpoint")
    p.add_argument("--steps", type=int, default=3000)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--accum", type=int, default=1)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--lr-final", type=float, default=None, help="cosine-decay target lr")
    p.add_argument("--wd", type=float, default=1e-2)
    p.add_argument("--p-uncond", type=float, default=0.1)
    p.add_argument("--p-drop", type=float, default=0.0)
    p.add_argument("--input-noise", type=float, default=0.0)
    p.add_argument("--scheduled-p", type=float, default=0.0,
                   help="final scheduled-sampling rate (ramped from 0)")
    p.add_argument("--max-gen-cols", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_train_ar)

    p = sub.add_parser("generate", parents=[common], help="generate a styled text image")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--style-image", required=True)
    p.add_argument("--style-text", default=None)
    p.add_argument("--text", required=True)
    p.add_argument("--gamma", type=float, default=1.25)
    p.add_argument("--max-cols", type=int, default=None)
    p.add_argument("--max-extra-sog", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("train-eval", parents=[common], help="train eval-harness models into a checkpoint")
    p.add_argument("--data", required=True)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--rec-steps", type=int, default=4000)
    p.add_argument("--style-steps", type=int, default=1500)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_train_eval)

    p = sub.add_parser("eval", parents=[common], help="run an evaluation protocol")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--protocol", choices=("with", "without", "noisy"), default="with")
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=1.25)
    p.add_argument("--max-cols", type=int, default=None)
    p.add_argument("--limit", type=int, default=0)
    p.add_argument("--report", required=True)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("bench", parents=[common], help="time numba vs numpy kernels")
    p.add_argument("--size", choices=("small", "full"), default="small")
    p.add_argument("--repeats", type=int, default=3)
    p.set_defaults(fn=cmd_bench)
    return parser


def _apply_threads(n: int) -> None:
    if n > 0:
        for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS",
                    "NUMBA_NUM_THREADS"):
            os.environ[var] = str(n)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_threads(args.threads)
    log = _logger(os.environ.get("ERUKU_LOG") or args.log)
    try:
        return args.fn(args, log)
    except BrokenPipeError:
        return 0
    except Exception as exc:  # runtime failures are exit code 2 with context
        print(f"eruku {args.cmd}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
