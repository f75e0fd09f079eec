"""Layers with hand-written backward passes, plus the loss.

There is no autodiff graph: the architecture is a fixed sequence of layers,
each caching what its backward pass needs. Everything runs in float64 on one
sample at a time; mini-batching is an outer loop with gradient accumulation.
"""

from __future__ import annotations

import numpy as np

from maskscore.nn import backend


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def fully_connected(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Affine map w @ x + b for a single input vector."""
    if x.shape[0] != w.shape[1]:
        raise ValueError(f"fully_connected: input dim {x.shape[0]} != weight dim {w.shape[1]}")
    return w @ x + b


def conv2d(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int = 1) -> np.ndarray:
    """3x3 convolution, padding 1, stride 1 or 2. x: (Cin, H, W), w: (Cout, Cin, 3, 3)."""
    if stride not in (1, 2):
        raise ValueError(f"stride must be 1 or 2, got {stride}")
    if x.ndim != 3 or w.ndim != 4 or w.shape[2:] != (3, 3):
        raise ValueError(f"bad conv shapes: x {x.shape}, w {w.shape}")
    if x.shape[0] != w.shape[1]:
        raise ValueError(f"conv2d: input channels {x.shape[0]} != weight channels {w.shape[1]}")
    return backend.conv2d_forward(
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(w, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64),
        stride,
    )


def max_pool_2x2(x: np.ndarray) -> np.ndarray:
    return backend.maxpool2x2_forward(np.ascontiguousarray(x, dtype=np.float64))


def l2_loss(
    pred: np.ndarray, target: np.ndarray, supervision: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean squared error over supervised entries, with its gradient.

    Unsupervised entries contribute nothing to the loss and receive exactly
    zero gradient. An all-false supervision vector yields (0.0, zeros).
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    sup = np.asarray(supervision, dtype=bool)
    if pred.shape != target.shape or pred.shape != sup.shape:
        raise ValueError(
            f"l2_loss length mismatch: pred {pred.shape}, target {target.shape}, "
            f"supervision {sup.shape}"
        )
    n = int(sup.sum())
    grad = np.zeros_like(pred)
    if n == 0:
        return 0.0, grad
    diff = np.where(sup, pred - target, 0.0)
    loss = float((diff * diff).sum() / n)
    grad = 2.0 * diff / n
    return loss, grad


class Conv2d:
    """3x3 convolution layer, padding 1, configurable stride."""

    def __init__(self, in_channels: int, out_channels: int, stride: int, rng: np.random.Generator):
        fan_in = in_channels * 9
        self.w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(out_channels, in_channels, 3, 3))
        self.b = np.zeros(out_channels)
        self.stride = stride
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._x: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = np.ascontiguousarray(x, dtype=np.float64)
        return conv2d(self._x, self.w, self.b, self.stride)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        dx, dw, db = backend.conv2d_backward(
            self._x, self.w, np.ascontiguousarray(dout, dtype=np.float64), self.stride
        )
        self.dw += dw
        self.db += db
        return dx

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.dw, self.db]


class Linear:
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.w = rng.normal(0.0, np.sqrt(2.0 / in_dim), size=(out_dim, in_dim))
        self.b = np.zeros(out_dim)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._x: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = np.asarray(x, dtype=np.float64)
        return fully_connected(self._x, self.w, self.b)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        self.dw += np.outer(dout, self._x)
        self.db += dout
        return self.w.T @ dout

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.dw, self.db]


class ReLU:
    def __init__(self):
        self._x: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return relu(x)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        return dout * (self._x > 0)

    def params(self):
        return []

    def grads(self):
        return []


class MaxPool2x2:
    def __init__(self):
        self._x: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = np.ascontiguousarray(x, dtype=np.float64)
        return backend.maxpool2x2_forward(self._x)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        return backend.maxpool2x2_backward(self._x, np.ascontiguousarray(dout, dtype=np.float64))

    def params(self):
        return []

    def grads(self):
        return []


class Flatten:
    def __init__(self):
        self._shape: tuple[int, ...] | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._shape = x.shape
        return x.reshape(-1)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        return dout.reshape(self._shape)

    def params(self):
        return []

    def grads(self):
        return []


class Network:
    """A fixed sequence of layers with shared forward/backward plumbing."""

    def __init__(self, layers: list):
        self.layers = layers

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, dout: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
        return dout

    def params(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params()]

    def grads(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads()]

    def zero_grads(self) -> None:
        for g in self.grads():
            g[...] = 0.0
