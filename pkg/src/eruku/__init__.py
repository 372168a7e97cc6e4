"""Eruku: autoregressive styled-text image generation on a desk-scale budget.

A column-latent VAE turns fixed-height text-line images into short
sequences of continuous latent columns; an encoder-decoder transformer
then regresses those columns autoregressively, conditioned on a style
example and a target string, with text-only classifier-free guidance at
sampling time.  Everything (models, training, evaluation) runs on plain
numpy, with numba-accelerated kernels for the few genuinely hot loops.
"""

__version__ = "0.1.0"
