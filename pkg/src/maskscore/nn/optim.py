"""SGD with classical momentum."""

from __future__ import annotations

import numpy as np


def sgd_momentum_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    velocities: list[np.ndarray],
    lr: float,
    momentum: float = 0.9,
) -> None:
    """In-place update: v <- momentum * v + grad; p <- p - lr * v."""
    for p, g, v in zip(params, grads, velocities, strict=True):
        v *= momentum
        v += g
        p -= lr * v


class SgdMomentum:
    """Holds per-parameter velocity buffers mirroring the parameter shapes."""

    def __init__(self, params: list[np.ndarray], lr: float, momentum: float = 0.9):
        self.params = params
        self.lr = lr
        self.momentum = momentum
        self.velocities = [np.zeros_like(p) for p in params]

    def step(self, grads: list[np.ndarray]) -> None:
        sgd_momentum_step(self.params, grads, self.velocities, self.lr, self.momentum)
