"""Versioned JSON checkpoints: layer shapes plus flat weight arrays."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

CHECKPOINT_SCHEMA = "maskscore-checkpoint-v1"


def save_checkpoint(path: str | Path, arrays: dict[str, np.ndarray], header: dict) -> None:
    """Write named float64 arrays with a schema tag and a caller header.

    The float lists round-trip losslessly (json serializes float64 via repr).
    """
    doc = {
        "schema": CHECKPOINT_SCHEMA,
        "header": header,
        "arrays": {
            name: {"shape": list(a.shape), "data": np.asarray(a, dtype=np.float64).reshape(-1).tolist()}
            for name, a in arrays.items()
        },
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema") != CHECKPOINT_SCHEMA:
        raise ValueError(
            f"unsupported checkpoint schema {doc.get('schema')!r}, expected {CHECKPOINT_SCHEMA!r}"
        )
    arrays = {
        name: np.array(entry["data"], dtype=np.float64).reshape(entry["shape"])
        for name, entry in doc["arrays"].items()
    }
    return arrays, doc["header"]
