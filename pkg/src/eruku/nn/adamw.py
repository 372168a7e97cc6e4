"""AdamW over a flat dict of named numpy parameters."""

from __future__ import annotations

import numpy as np


class AdamW:
    """Adam with decoupled weight decay.

    Decay applies to rank >= 2 tensors only (weight matrices, embedding
    tables); biases, layernorm params, and special single-vector
    embeddings are exempt.
    """

    def __init__(self, params: dict, lr=1e-4, betas=(0.9, 0.999), eps=1e-8, weight_decay=1e-2):
        self.params = params
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.wd = weight_decay
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, grads: dict) -> None:
        self.t += 1
        b1t = 1.0 - self.b1**self.t
        b2t = 1.0 - self.b2**self.t
        for k in sorted(self.params):
            g = grads[k]
            p = self.params[k]
            m = self.m[k]
            v = self.v[k]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * (g * g)
            mhat = m / b1t
            vhat = v / b2t
            if self.wd and p.ndim >= 2:
                p -= self.lr * self.wd * p
            p -= self.lr * mhat / (np.sqrt(vhat) + self.eps)
