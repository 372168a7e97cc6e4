"""Scalar metrics: normalized edit distance and Frechet feature distance."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInput
from ..kernels import levenshtein


def cer(reference: str, hypothesis: str) -> float:
    """Levenshtein(reference, hypothesis) / len(reference)."""
    if not reference:
        raise InvalidInput("CER reference must be non-empty")
    return levenshtein(reference, hypothesis) / len(reference)


def mean_cer(references: list[str], hypotheses: list[str]) -> float:
    if len(references) != len(hypotheses):
        raise InvalidInput("reference/hypothesis count mismatch")
    if not references:
        raise InvalidInput("empty evaluation set")
    return float(np.mean([cer(r, h) for r, h in zip(references, hypotheses)]))


def delta_cer(gen_refs, gen_hyps, ref_refs, ref_hyps) -> float:
    """|mean CER of generated set - mean CER of reference set|."""
    return abs(mean_cer(gen_refs, gen_hyps) - mean_cer(ref_refs, ref_hyps))


def _mean_cov(feats: np.ndarray):
    n, d = feats.shape
    mu = feats.mean(axis=0)
    centered = feats - mu
    cov = centered.T @ centered / max(n - 1, 1)
    if n < d + 1:
        # rank-deficient covariance: documented ridge keeps the sqrt stable
        cov = cov + 1e-6 * np.eye(d)
    return mu, cov


def _sym_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(m)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(feats_a: np.ndarray, feats_b: np.ndarray) -> float:
    """||mu_a - mu_b||^2 + Tr(Sa + Sb - 2 (Sa Sb)^(1/2)).

    The cross sqrt is computed as the symmetric eigendecomposition of
    Sa^(1/2) Sb Sa^(1/2); negative eigenvalues from roundoff clip to 0.
    """
    a = np.asarray(feats_a, dtype=np.float64)
    b = np.asarray(feats_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise InvalidInput(f"feature sets must be (n, d) with equal d, got {a.shape} {b.shape}")
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise InvalidInput("each feature set needs at least 2 vectors")
    mu_a, cov_a = _mean_cov(a)
    mu_b, cov_b = _mean_cov(b)
    sqrt_a = _sym_sqrt(cov_a)
    cross = _sym_sqrt(sqrt_a @ cov_b @ sqrt_a)
    diff = mu_a - mu_b
    val = float(diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(cross))
    return max(val, 0.0)


def hwd_proxy(gen_feats: np.ndarray, style_feats: np.ndarray) -> float:
    """Euclidean distance between the feature centroids of the two sets."""
    g = np.asarray(gen_feats, dtype=np.float64)
    s = np.asarray(style_feats, dtype=np.float64)
    if g.ndim != 2 or s.ndim != 2 or g.shape[1] != s.shape[1]:
        raise InvalidInput("feature sets must be (n, d) with equal d")
    if not g.size or not s.size:
        raise InvalidInput("empty feature set")
    return float(np.linalg.norm(g.mean(axis=0) - s.mean(axis=0)))
