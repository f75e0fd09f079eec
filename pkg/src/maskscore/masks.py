"""Pixel-exact mask representations and geometry.

Masks come in three forms: a soft per-pixel score map in [0, 1], a hard
binary bitmap, and an uncompressed run-length encoding used for JSON
persistence (COCO interchange convention: column-major runs starting with
background). All values are immutable after construction and every
operation here is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SoftMask",
    "BinaryMask",
    "RleMask",
    "BBox",
    "binarize",
    "mask_iou",
    "box_iou",
    "rle_encode",
    "rle_decode",
    "mask_to_bbox",
    "crop_mask_nearest",
    "crop_binary_nearest",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SoftMask:
    """Per-pixel foreground score map, shape (height, width), values in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.size == 0:
            raise ValueError(f"soft mask must be a non-empty 2-D array, got shape {v.shape}")
        if np.any(v < 0.0) or np.any(v > 1.0) or not np.all(np.isfinite(v)):
            raise ValueError("soft mask values must lie in [0, 1]")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Hard foreground bitmap, shape (height, width), dtype bool."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 2 or b.size == 0:
            raise ValueError(f"binary mask must be a non-empty 2-D array, got shape {b.shape}")
        object.__setattr__(self, "bits", _freeze(b.astype(bool)))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def area(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class RleMask:
    """Uncompressed run-length encoding of a binary mask.

    Runs are counted down columns (column-major), starting with a background
    run (possibly 0). ``sum(counts) == width * height`` always holds.
    """

    width: int
    height: int
    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if self.width < 1 or self.height < 1:
            raise ValueError("RLE dimensions must be >= 1")
        if any(c < 0 for c in counts):
            raise ValueError("RLE counts must be nonnegative")
        if sum(counts) != self.width * self.height:
            raise ValueError(
                f"RLE counts sum to {sum(counts)}, expected {self.width * self.height}"
            )
        object.__setattr__(self, "counts", counts)

    def to_json(self) -> dict:
        """COCO uncompressed RLE shape: {"size": [height, width], "counts": [...]}."""
        return {"size": [self.height, self.width], "counts": list(self.counts)}

    @classmethod
    def from_json(cls, obj: dict) -> "RleMask":
        counts = obj["counts"]
        if isinstance(counts, (str, bytes)):
            raise ValueError(
                "compressed RLE strings are not supported; provide uncompressed "
                "integer counts"
            )
        h, w = (int(x) for x in obj["size"])
        return cls(width=w, height=h, counts=tuple(int(c) for c in counts))


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box with top-left corner (x, y) and positive extents (w, h)."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box extents must be positive, got w={self.w}, h={self.h}")

    def area(self) -> float:
        return self.w * self.h

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


def binarize(mask: SoftMask, threshold: float = 0.5) -> BinaryMask:
    """Threshold a soft mask; a pixel is foreground iff its value >= threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    return BinaryMask(mask.values >= threshold)


def mask_iou(a: BinaryMask, b: BinaryMask) -> float:
    """Pixel-level intersection-over-union of two same-sized binary masks.

    Returns 0.0 when the union is empty (two empty masks never count as a
    perfect match).
    """
    if a.bits.shape != b.bits.shape:
        raise ValueError(f"mask shapes differ: {a.bits.shape} vs {b.bits.shape}")
    inter = np.count_nonzero(a.bits & b.bits)
    union = np.count_nonzero(a.bits | b.bits)
    if union == 0:
        return 0.0
    return inter / union


def box_iou(a: BBox, b: BBox) -> float:
    """Rectangle intersection-over-union."""
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area() + b.area() - inter)


def rle_encode(m: BinaryMask) -> RleMask:
    """Encode column-major with a leading background run (COCO convention)."""
    flat = m.bits.T.ravel()  # column-major scan
    # Run boundaries via change points; prepend the implicit background start.
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    counts = np.diff(bounds)
    if flat[0]:  # leading run must be background
        counts = np.concatenate(([0], counts))
    return RleMask(width=m.width, height=m.height, counts=tuple(int(c) for c in counts))


def rle_decode(r: RleMask) -> BinaryMask:
    flat = np.zeros(r.width * r.height, dtype=bool)
    pos = 0
    val = False
    for c in r.counts:
        if val:
            flat[pos : pos + c] = True
        pos += c
        val = not val
    return BinaryMask(flat.reshape(r.width, r.height).T)


def mask_to_bbox(m: BinaryMask) -> BBox | None:
    """Tight box over foreground pixels; None for an empty mask."""
    rows = np.flatnonzero(m.bits.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(m.bits.any(axis=0))
    y0, y1 = int(rows[0]), int(rows[-1])
    x0, x1 = int(cols[0]), int(cols[-1])
    return BBox(x=float(x0), y=float(y0), w=float(x1 - x0 + 1), h=float(y1 - y0 + 1))


def _nearest_indices(box: BBox, out_side: int, width: int, height: int):
    """Scene pixel indices sampled at the centers of an out_side x out_side grid
    laid over ``box``, clamped to the scene bounds."""
    sx = box.x + (np.arange(out_side) + 0.5) * (box.w / out_side)
    sy = box.y + (np.arange(out_side) + 0.5) * (box.h / out_side)
    cx = np.clip(np.floor(sx).astype(np.int64), 0, width - 1)
    cy = np.clip(np.floor(sy).astype(np.int64), 0, height - 1)
    return cy, cx


def crop_mask_nearest(mask: SoftMask, box: BBox, out_side: int) -> SoftMask:
    """Resample a soft mask into the box frame by nearest-neighbor lookup."""
    cy, cx = _nearest_indices(box, out_side, mask.width, mask.height)
    return SoftMask(mask.values[np.ix_(cy, cx)])


def crop_binary_nearest(mask: BinaryMask, box: BBox, out_side: int) -> BinaryMask:
    """Resample a binary mask into the box frame by nearest-neighbor lookup."""
    cy, cx = _nearest_indices(box, out_side, mask.width, mask.height)
    return BinaryMask(mask.bits[np.ix_(cy, cx)])
