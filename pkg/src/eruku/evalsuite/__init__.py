"""Evaluation harness: CER/Frechet metrics, CTC recognizer, style features."""

from .evalrun import (
    CSV_HEADER,
    PROTOCOLS,
    EvalModels,
    EvalReport,
    EvalRunConfig,
    corrupt_text,
    eval_run,
    write_report_csv,
)
from .metrics import cer, delta_cer, frechet_distance, hwd_proxy, mean_cer
from .recognizer import (
    BLANK,
    CHARSET,
    RecConfig,
    RecTrainConfig,
    ctc_step,
    labels_of,
    train_recognizer,
    transcribe,
)
from .evalrun import pooled_latent_features
from .stylenet import StyleNetConfig, StyleTrainConfig, classify, features, train_stylenet

__all__ = [
    "CSV_HEADER", "PROTOCOLS", "EvalModels", "EvalReport", "EvalRunConfig",
    "corrupt_text", "eval_run", "pooled_latent_features", "write_report_csv",
    "cer", "delta_cer", "frechet_distance", "hwd_proxy", "mean_cer",
    "BLANK", "CHARSET", "RecConfig", "RecTrainConfig", "ctc_step",
    "labels_of", "train_recognizer", "transcribe",
    "StyleNetConfig", "StyleTrainConfig", "classify", "features", "train_stylenet",
]
