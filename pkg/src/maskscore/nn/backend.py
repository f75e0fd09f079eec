"""Kernel backend selection.

The compiled Cython extension is preferred when importable; otherwise the
NumPy fallback is used. ``MASKSCORE_KERNELS`` overrides: "compiled" insists
on the extension (ImportError if missing), "python" forces the fallback,
"auto" (default) picks compiled when available.
"""

from __future__ import annotations

import os

from maskscore.nn import kernels_py

_choice = os.environ.get("MASKSCORE_KERNELS", "auto").lower()
if _choice not in ("auto", "compiled", "python"):
    raise ValueError(f"MASKSCORE_KERNELS must be auto|compiled|python, got {_choice!r}")

if _choice == "python":
    _impl = kernels_py
    BACKEND = "python"
else:
    try:
        from maskscore.nn import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _choice == "compiled":
            raise
        _impl = kernels_py
        BACKEND = "python"


def backend_name() -> str:
    return BACKEND


conv2d_forward = _impl.conv2d_forward
conv2d_backward = _impl.conv2d_backward
maxpool2x2_forward = _impl.maxpool2x2_forward
maxpool2x2_backward = _impl.maxpool2x2_backward
