"""Minimal dense neural-network kernel: forward, analytic backward, loss,
optimizer and finite-difference gradient verification.

Hot loops (convolution, pooling) dispatch to a compiled Cython extension when
available, with a NumPy fallback selected at import; see
:mod:`maskscore.nn.backend`.
"""

from maskscore.nn.backend import backend_name
from maskscore.nn.checkpoint import CHECKPOINT_SCHEMA, load_checkpoint, save_checkpoint
from maskscore.nn.gradcheck import grad_check
from maskscore.nn.layers import (
    Conv2d,
    Flatten,
    Linear,
    MaxPool2x2,
    Network,
    ReLU,
    conv2d,
    fully_connected,
    l2_loss,
    max_pool_2x2,
    relu,
)
from maskscore.nn.optim import SgdMomentum, sgd_momentum_step

__all__ = [
    "backend_name",
    "CHECKPOINT_SCHEMA",
    "load_checkpoint",
    "save_checkpoint",
    "grad_check",
    "Conv2d",
    "Flatten",
    "Linear",
    "MaxPool2x2",
    "Network",
    "ReLU",
    "conv2d",
    "fully_connected",
    "l2_loss",
    "max_pool_2x2",
    "relu",
    "SgdMomentum",
    "sgd_momentum_step",
]
