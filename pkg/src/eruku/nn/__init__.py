"""Minimal numpy autodiff-by-hand toolkit shared by the VAE and the AR model.

Every op comes as an explicit forward returning (output, cache) and a
matching backward; models chain them manually.  All ops are dtype
agnostic so gradient checks can run the identical code in float64.
"""

from . import ops
from .adamw import AdamW
from .gradcheck import numeric_grad

__all__ = ["ops", "AdamW", "numeric_grad"]
