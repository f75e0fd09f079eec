"""Mask-IoU regression head.

The head takes a predicted instance mask fused with the RoI feature grid and
regresses, per class, the pixel IoU between the binarized mask and ground
truth. At inference the predicted class's output, clamped to [0, 1],
multiplies the classification score to give the final mask confidence.

Architecture: four 3x3 convolutions (the last with stride 2 for
downsampling), then three fully connected layers ending in one output per
class. Defaults use desk-scale widths; paper-scale widths (256 conv
channels, 1024-wide FC) are reachable through the config.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field, replace

import numpy as np

from maskscore.masks import BinaryMask, SoftMask, binarize, mask_iou
from maskscore.nn import (
    Conv2d,
    Flatten,
    Linear,
    MaxPool2x2,
    Network,
    ReLU,
    l2_loss,
    load_checkpoint,
    max_pool_2x2,
    save_checkpoint,
)
from maskscore.nn.optim import SgdMomentum

FUSION_VARIANTS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class HeadConfig:
    """Shape and fusion configuration of the IoU regressor.

    fusion_variant:
      A - target-class mask, 2x2 max-pooled, concatenated as an extra channel
      B - pooled target-class mask multiplied into every feature channel
      C - all per-class masks pooled and concatenated
      D - target-class mask concatenated with a full-resolution feature grid
    """

    num_classes: int
    feature_channels: int
    fusion_variant: str = "A"
    conv_channels: int = 16
    fc_width: int = 64
    mask_side: int = 28
    feature_side: int = 14

    def __post_init__(self):
        if self.fusion_variant not in FUSION_VARIANTS:
            raise ValueError(f"fusion_variant must be one of {FUSION_VARIANTS}")
        for name in ("num_classes", "feature_channels", "conv_channels", "fc_width"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.mask_side != 2 * self.feature_side:
            raise ValueError("mask_side must be twice feature_side")
        if self.mask_side % 4 != 0:
            raise ValueError("mask_side must be divisible by 4")

    @property
    def fused_channels(self) -> int:
        return {
            "A": self.feature_channels + 1,
            "B": self.feature_channels,
            "C": self.feature_channels + self.num_classes,
            "D": self.feature_channels + 1,
        }[self.fusion_variant]

    @property
    def fused_side(self) -> int:
        return self.mask_side if self.fusion_variant == "D" else self.feature_side

    @property
    def roi_side(self) -> int:
        """Spatial side the RoI feature grid must have for this variant."""
        return self.fused_side

    def to_dict(self) -> dict:
        return {
            "num_classes": self.num_classes,
            "feature_channels": self.feature_channels,
            "fusion_variant": self.fusion_variant,
            "conv_channels": self.conv_channels,
            "fc_width": self.fc_width,
            "mask_side": self.mask_side,
            "feature_side": self.feature_side,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HeadConfig":
        return cls(**d)


@dataclass(frozen=True)
class TrainConfig:
    target_setting: int = 1
    tau: float = 0.0
    epochs: int = 18
    lr: float = 0.01
    lr_decay_epochs: tuple[int, ...] | None = None
    lr_decay_factor: float = 0.1
    momentum: float = 0.9
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.target_setting not in (1, 2, 3):
            raise ValueError("target_setting must be 1, 2 or 3")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")

    def decay_epochs(self) -> tuple[int, ...]:
        """Learning-rate decay points; defaults scale at 78% / 94% of total."""
        if self.lr_decay_epochs is not None:
            return tuple(self.lr_decay_epochs)
        return (round(0.78 * self.epochs), round(0.94 * self.epochs))

    def to_dict(self) -> dict:
        return {
            "target_setting": self.target_setting,
            "tau": self.tau,
            "epochs": self.epochs,
            "lr": self.lr,
            "lr_decay_epochs": None if self.lr_decay_epochs is None else list(self.lr_decay_epochs),
            "lr_decay_factor": self.lr_decay_factor,
            "momentum": self.momentum,
            "batch_size": self.batch_size,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        if d.get("lr_decay_epochs") is not None:
            d["lr_decay_epochs"] = tuple(d["lr_decay_epochs"])
        return cls(**d)


@dataclass(eq=False)
class TrainingSample:
    """One head training example in the RoI frame."""

    roi_feature: np.ndarray  # (feature_channels, roi_side, roi_side)
    pred_mask: SoftMask  # mask_side x mask_side, target class
    class_label: int
    targets: np.ndarray  # (num_classes,)
    supervision: np.ndarray  # (num_classes,) bool

    @property
    def target_iou(self) -> float:
        """Mask IoU target of the labeled class (supervised in every setting)."""
        return float(self.targets[self.class_label])


def _target_mask(pred_masks: SoftMask | Mapping[int, SoftMask], target_class: int) -> SoftMask:
    if isinstance(pred_masks, SoftMask):
        return pred_masks
    if target_class not in pred_masks:
        raise KeyError(f"no predicted mask for target class {target_class}")
    return pred_masks[target_class]


def fuse_inputs(
    pred_masks: SoftMask | Mapping[int, SoftMask],
    roi_feature: np.ndarray,
    target_class: int,
    config: HeadConfig,
) -> np.ndarray:
    """Combine predicted mask(s) with the RoI feature grid per the fusion variant.

    Variants A/B/C expect the feature grid at feature_side; D expects it at
    mask_side. For variant C, classes without a predicted mask contribute an
    all-zero plane.
    """
    if not 0 <= target_class < config.num_classes:
        raise ValueError(f"target class {target_class} out of range")
    roi_feature = np.asarray(roi_feature, dtype=np.float64)
    expect = (config.feature_channels, config.roi_side, config.roi_side)
    if roi_feature.shape != expect:
        raise ValueError(
            f"variant {config.fusion_variant} needs RoI feature {expect}, got {roi_feature.shape}"
        )

    def pooled(mask: SoftMask) -> np.ndarray:
        if (mask.height, mask.width) != (config.mask_side, config.mask_side):
            raise ValueError(
                f"predicted mask must be {config.mask_side}x{config.mask_side}, "
                f"got {mask.height}x{mask.width}"
            )
        return max_pool_2x2(mask.values[None])[0]

    variant = config.fusion_variant
    if variant == "A":
        plane = pooled(_target_mask(pred_masks, target_class))
        return np.ascontiguousarray(np.concatenate([roi_feature, plane[None]], axis=0))
    if variant == "B":
        plane = pooled(_target_mask(pred_masks, target_class))
        return np.ascontiguousarray(roi_feature * plane[None])
    if variant == "C":
        if isinstance(pred_masks, SoftMask):
            pred_masks = {target_class: pred_masks}
        zero = np.zeros((config.feature_side, config.feature_side))
        planes = [
            pooled(pred_masks[c]) if c in pred_masks else zero for c in range(config.num_classes)
        ]
        return np.ascontiguousarray(np.concatenate([roi_feature, np.stack(planes)], axis=0))
    # variant D: full-resolution concat
    mask = _target_mask(pred_masks, target_class)
    if (mask.height, mask.width) != (config.mask_side, config.mask_side):
        raise ValueError("variant D needs the mask at full resolution")
    return np.ascontiguousarray(np.concatenate([roi_feature, mask.values[None]], axis=0))


class MaskIoUHead:
    """4-conv + 3-FC regressor producing one raw IoU estimate per class."""

    LAYER_NAMES = ("conv1", "conv2", "conv3", "conv4", "fc1", "fc2", "fc3")

    def __init__(self, config: HeadConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(901,)))
        cc = config.conv_channels
        out_side = config.fused_side // 2  # final conv downsamples by 2
        self._named = {
            "conv1": Conv2d(config.fused_channels, cc, stride=1, rng=rng),
            "conv2": Conv2d(cc, cc, stride=1, rng=rng),
            "conv3": Conv2d(cc, cc, stride=1, rng=rng),
            "conv4": Conv2d(cc, cc, stride=2, rng=rng),
            "fc1": Linear(cc * out_side * out_side, config.fc_width, rng=rng),
            "fc2": Linear(config.fc_width, config.fc_width, rng=rng),
            "fc3": Linear(config.fc_width, config.num_classes, rng=rng),
        }
        n = self._named
        self.network = Network([
            n["conv1"], ReLU(), n["conv2"], ReLU(), n["conv3"], ReLU(), n["conv4"], ReLU(),
            Flatten(), n["fc1"], ReLU(), n["fc2"], ReLU(), n["fc3"],
        ])

    def forward(self, fused: np.ndarray) -> np.ndarray:
        """Raw per-class IoU predictions (unbounded; clamp only at inference)."""
        fused = np.asarray(fused, dtype=np.float64)
        expect = (self.config.fused_channels, self.config.fused_side, self.config.fused_side)
        if fused.shape != expect:
            raise ValueError(f"fused input must have shape {expect}, got {fused.shape}")
        return self.network.forward(fused)

    def predict_iou(
        self,
        pred_masks: SoftMask | Mapping[int, SoftMask],
        roi_feature: np.ndarray,
        predicted_class: int,
    ) -> float:
        """Predicted mask IoU for the predicted class, clamped to [0, 1]."""
        fused = fuse_inputs(pred_masks, roi_feature, predicted_class, self.config)
        raw = self.forward(fused)[predicted_class]
        return float(min(1.0, max(0.0, raw)))

    def flops(self) -> int:
        """Multiply-accumulate count of one forward pass."""
        c = self.config
        side, half = c.fused_side, c.fused_side // 2
        cc = c.conv_channels
        total = c.fused_channels * cc * 9 * side * side
        total += 2 * cc * cc * 9 * side * side
        total += cc * cc * 9 * half * half
        total += cc * half * half * c.fc_width
        total += c.fc_width * c.fc_width
        total += c.fc_width * c.num_classes
        return total

    def save(self, path, extra_header: dict | None = None) -> None:
        arrays = {}
        for name in self.LAYER_NAMES:
            arrays[f"{name}.w"] = self._named[name].w
            arrays[f"{name}.b"] = self._named[name].b
        header = {"head_config": self.config.to_dict()}
        if extra_header:
            header.update(extra_header)
        save_checkpoint(path, arrays, header)

    @classmethod
    def load(cls, path) -> tuple["MaskIoUHead", dict]:
        arrays, header = load_checkpoint(path)
        head = cls(HeadConfig.from_dict(header["head_config"]))
        for name in cls.LAYER_NAMES:
            layer = head._named[name]
            w, b = arrays[f"{name}.w"], arrays[f"{name}.b"]
            if w.shape != layer.w.shape or b.shape != layer.b.shape:
                raise ValueError(f"checkpoint weight shapes do not match config at {name}")
            layer.w = w
            layer.b = b
            layer.dw = np.zeros_like(w)
            layer.db = np.zeros_like(b)
        return head, header


def head_forward(head: MaskIoUHead, fused: np.ndarray) -> np.ndarray:
    return head.forward(fused)


def predict_siou(
    head: MaskIoUHead,
    pred_masks: SoftMask | Mapping[int, SoftMask],
    roi_feature: np.ndarray,
    predicted_class: int,
) -> float:
    return head.predict_iou(pred_masks, roi_feature, predicted_class)


def make_target(
    pred_mask: SoftMask,
    gt_masks: Mapping[int, BinaryMask],
    gt_class: int,
    setting: int,
    num_classes: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-class regression targets and supervision flags for one sample.

    ``gt_masks`` maps each class present in the RoI frame to its ground-truth
    mask rendered in that frame. Targets are the IoU of the binarized
    predicted mask against each class's ground truth:

      setting 1 - supervise the ground-truth class only
      setting 2 - supervise all classes; absent classes get target 0
      setting 3 - supervise exactly the classes present in the RoI
    """
    if setting not in (1, 2, 3):
        raise ValueError("setting must be 1, 2 or 3")
    if gt_class not in gt_masks:
        raise ValueError(f"missing ground-truth mask for class {gt_class}")
    pred_bin = binarize(pred_mask, 0.5)
    targets = np.zeros(num_classes)
    supervision = np.zeros(num_classes, dtype=bool)
    if setting == 1:
        targets[gt_class] = mask_iou(pred_bin, gt_masks[gt_class])
        supervision[gt_class] = True
        return targets, supervision
    for c, gm in gt_masks.items():
        targets[c] = mask_iou(pred_bin, gm)
        supervision[c] = True
    if setting == 2:
        supervision[:] = True  # absent classes keep target 0
    return targets, supervision


def select_training_samples(samples: list[TrainingSample], tau: float) -> list[TrainingSample]:
    """Keep samples whose target-class IoU exceeds tau.

    tau = 0.0 keeps every sample, including exact-zero IoU ones (training on
    all examples is the default).
    """
    if tau == 0.0:
        return list(samples)
    return [s for s in samples if s.target_iou > tau]


def train(
    samples: list[TrainingSample],
    head_config: HeadConfig,
    train_config: TrainConfig,
) -> tuple[MaskIoUHead, list[float]]:
    """Train the head with momentum SGD; returns the head and per-epoch mean loss.

    Deterministic given the config seed: initialization, shuffling and batch
    order all derive from it.
    """
    kept = select_training_samples(samples, train_config.tau)
    if not kept:
        raise ValueError(f"no training samples left after tau={train_config.tau} selection")

    head = MaskIoUHead(head_config, seed=train_config.seed)
    fused = [
        fuse_inputs(s.pred_mask, s.roi_feature, s.class_label, head_config) for s in kept
    ]
    opt = SgdMomentum(head.network.params(), lr=train_config.lr, momentum=train_config.momentum)
    shuffle_rng = np.random.default_rng(
        np.random.SeedSequence(entropy=train_config.seed, spawn_key=(902,))
    )
    decay_at = train_config.decay_epochs()

    losses: list[float] = []
    n = len(kept)
    for epoch in range(train_config.epochs):
        if epoch in decay_at:
            opt.lr *= train_config.lr_decay_factor
        order = shuffle_rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, train_config.batch_size):
            batch = order[start : start + train_config.batch_size]
            head.network.zero_grads()
            for idx in batch:
                s = kept[idx]
                pred = head.network.forward(fused[idx])
                loss, dpred = l2_loss(pred, s.targets, s.supervision)
                epoch_loss += loss
                head.network.backward(dpred / len(batch))
            opt.step(head.network.grads())
        losses.append(epoch_loss / n)
    return head, losses
