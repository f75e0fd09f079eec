"""NumPy implementations of the hot layer kernels.

These are the fallback used when the compiled extension is unavailable, and
the reference the extension is tested against. All kernels operate on one
sample at a time in float64; convolutions are fixed at kernel 3x3, padding 1,
stride 1 or 2.
"""

from __future__ import annotations

import numpy as np


def _out_side(n: int, stride: int) -> int:
    # padding 1, kernel 3: stride 1 preserves n, stride 2 -> ceil(n / 2)
    return (n - 1) // stride + 1


def _im2col(xp: np.ndarray, stride: int, ho: int, wo: int) -> np.ndarray:
    """Gather 3x3 patches of a padded (C, H+2, W+2) input into (C*9, ho*wo)."""
    c = xp.shape[0]
    cols = np.empty((c, 3, 3, ho, wo), dtype=np.float64)
    for ki in range(3):
        for kj in range(3):
            cols[:, ki, kj] = xp[
                :, ki : ki + stride * (ho - 1) + 1 : stride, kj : kj + stride * (wo - 1) + 1 : stride
            ]
    return cols.reshape(c * 9, ho * wo)


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int) -> np.ndarray:
    """3x3 convolution with padding 1. x: (Cin, H, W), w: (Cout, Cin, 3, 3)."""
    cin, h, wdt = x.shape
    cout = w.shape[0]
    ho, wo = _out_side(h, stride), _out_side(wdt, stride)
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    cols = _im2col(xp, stride, ho, wo)
    y = w.reshape(cout, cin * 9) @ cols + b[:, None]
    return y.reshape(cout, ho, wo)


def conv2d_backward(
    x: np.ndarray, w: np.ndarray, dout: np.ndarray, stride: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of conv2d_forward w.r.t. input, weights and bias."""
    cin, h, wdt = x.shape
    cout, _, _, _ = w.shape
    ho, wo = dout.shape[1], dout.shape[2]
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    cols = _im2col(xp, stride, ho, wo)
    dout_mat = dout.reshape(cout, ho * wo)

    dw = (dout_mat @ cols.T).reshape(w.shape)
    db = dout_mat.sum(axis=1)

    dcols = (w.reshape(cout, cin * 9).T @ dout_mat).reshape(cin, 3, 3, ho, wo)
    dxp = np.zeros_like(xp)
    for ki in range(3):
        for kj in range(3):
            dxp[
                :, ki : ki + stride * (ho - 1) + 1 : stride, kj : kj + stride * (wo - 1) + 1 : stride
            ] += dcols[:, ki, kj]
    return dxp[:, 1 : h + 1, 1 : wdt + 1].copy(), dw, db


def maxpool2x2_forward(x: np.ndarray) -> np.ndarray:
    """2x2/stride-2 max pooling. Requires even spatial dims."""
    c, h, w = x.shape
    if h % 2 or w % 2:
        raise ValueError(f"max_pool_2x2 needs even spatial dims, got {h}x{w}")
    return x.reshape(c, h // 2, 2, w // 2, 2).max(axis=(2, 4))


def maxpool2x2_backward(x: np.ndarray, dout: np.ndarray) -> np.ndarray:
    """Routes each output gradient to the first maximum of its 2x2 window
    (row-major window order breaks ties)."""
    c, h, w = x.shape
    win = x.reshape(c, h // 2, 2, w // 2, 2).transpose(0, 1, 3, 2, 4).reshape(c, h // 2, w // 2, 4)
    arg = win.argmax(axis=3)  # first occurrence on ties
    dwin = np.zeros_like(win)
    np.put_along_axis(dwin, arg[..., None], dout[..., None], axis=3)
    return (
        dwin.reshape(c, h // 2, w // 2, 2, 2).transpose(0, 1, 3, 2, 4).reshape(c, h, w).copy()
    )
