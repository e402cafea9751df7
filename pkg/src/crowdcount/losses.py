"""Training objectives: smooth-L1 count regression, density-level
classification, and their weighted combination."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ops
from .tensor import ShapeError, Tensor

CLS_LOSS_KINDS = ("categorical", "per_class_bce")


@dataclass
class LossConfig:
    cls_weight: float = 0.001  # balance between regression and classification
    cls_loss: str = "categorical"

    def validate(self) -> None:
        if self.cls_weight < 0:
            raise ValueError(f"classification weight must be >= 0, got {self.cls_weight}")
        if self.cls_loss not in CLS_LOSS_KINDS:
            raise ValueError(f"cls_loss must be one of {CLS_LOSS_KINDS}, got {self.cls_loss!r}")


def smooth_l1_loss(preds: Tensor, targets: Tensor) -> Tensor:
    """Mean over samples of the smooth-L1 residual penalty."""
    if preds.data.ndim != 1 or preds.shape != targets.shape:
        raise ShapeError(f"predictions {preds.shape} and targets {targets.shape} must be equal-length vectors")
    if preds.size == 0:
        raise ShapeError("smooth_l1_loss of an empty batch")
    return ops.mean(ops.huber_elementwise(ops.sub(preds, targets)))


def _one_hot(levels: np.ndarray, k: int, dtype) -> np.ndarray:
    levels = np.asarray(levels)
    if levels.ndim != 1:
        raise ShapeError(f"levels must be a vector, got shape {levels.shape}")
    if ((levels < 0) | (levels >= k)).any():
        raise ValueError(f"levels must lie in 0..{k - 1}")
    out = np.zeros((levels.size, k), dtype=dtype)
    out[np.arange(levels.size), levels] = 1.0
    return out


def density_cls_loss(y_cls: Tensor, levels, kind: str = "categorical") -> Tensor:
    """Classification loss against integer level targets, averaged over the batch.

    ``y_cls`` is a probability row (1, K) shared by the batch, or per-sample
    rows (B, K).  ``categorical`` is cross-entropy on one-hot targets;
    ``per_class_bce`` treats each of the K entries as an independent
    binary decision.
    """
    if kind not in CLS_LOSS_KINDS:
        raise ValueError(f"unknown cls loss kind {kind!r}")
    levels = np.atleast_1d(np.asarray(levels, dtype=np.int64))
    k = y_cls.shape[-1]
    m = levels.size
    if y_cls.data.ndim != 2 or y_cls.shape[0] not in (1, m):
        raise ShapeError(f"y_cls {y_cls.shape} does not fit {m} targets")
    onehot = Tensor(_one_hot(levels, k, y_cls.dtype))
    if kind == "categorical":
        # select first, then log: unselected entries may legitimately be 0
        picked = ops.sum(ops.mul(onehot, y_cls), axis=1)
        return ops.scalar_mul(ops.sum(ops.log(picked)), -1.0 / m)
    # per-class binary reading: -sum_k [t_k log y_k + (1 - t_k) log(1 - y_k)].
    # The masked-out branch is shifted into log's domain by the (constant)
    # complementary mask, which leaves both value and gradient untouched.
    anti = Tensor(1.0 - onehot.data)
    pos = ops.mul(onehot, ops.log(ops.add(y_cls, anti)))
    neg = ops.mul(anti, ops.log(ops.sub(ops.add(onehot, Tensor(np.ones_like(onehot.data))), y_cls)))
    return ops.scalar_mul(ops.sum(ops.add(pos, neg)), -1.0 / m)


def total_loss(l_reg: Tensor, l_cls: Tensor, cfg: LossConfig) -> Tensor:
    """Combined objective: regression plus ``cls_weight`` times classification."""
    cfg.validate()
    if not (np.isfinite(l_reg.data).all() and np.isfinite(l_cls.data).all()):
        raise ValueError("loss terms must be finite")
    return ops.add(l_reg, ops.scalar_mul(l_cls, cfg.cls_weight))
