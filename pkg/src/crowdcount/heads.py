"""Prediction heads: count regression and density-level classification.

The regression head is a linear probe on the pooled feature.  The
classification head is deliberately decoupled from the image: it reads a
learnable token (a dataset-level prior), so its output is identical for
every image under a given checkpoint and its gradients never touch the
counting branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ops
from .rng import weight_param, zeros_param
from .tensor import DEFAULT_DTYPE, ShapeError, Tensor


@dataclass
class RegressionHead:
    weight: Tensor  # (1, d)
    bias: Tensor  # (1,)


@dataclass
class ClassificationHead:
    density_token: Tensor  # (1, d) learnable global prior, zero-initialized
    weight: Tensor  # (K, d)
    bias: Tensor  # (K,)


@dataclass
class DensityLevelConfig:
    num_levels: int = 10  # K
    c_max: float = 1.0  # maximum count, taken from the training split

    def validate(self) -> None:
        if self.num_levels < 2:
            raise ValueError(f"need at least 2 density levels, got {self.num_levels}")
        if not self.c_max > 0:
            raise ValueError(f"c_max must be positive, got {self.c_max}")


def init_regression_head(d: int, rng, dtype=DEFAULT_DTYPE) -> RegressionHead:
    return RegressionHead(weight_param(rng, (1, d), dtype), zeros_param((1,), dtype))


def init_classification_head(d: int, k: int, rng, dtype=DEFAULT_DTYPE) -> ClassificationHead:
    return ClassificationHead(
        density_token=zeros_param((1, d), dtype),
        weight=weight_param(rng, (k, d), dtype),
        bias=zeros_param((k,), dtype),
    )


def regress_count(pooled: Tensor, head: RegressionHead) -> Tensor:
    """Scalar count prediction per sample, shape (B,); may be negative.

    Clamping to zero happens only at reporting time, never inside the
    head or the loss.
    """
    if pooled.data.ndim != 2 or head.weight.shape != (1, pooled.shape[1]):
        raise ShapeError(f"pooled {pooled.shape} does not match head weight {head.weight.shape}")
    y = ops.linear(pooled, ops.transpose(head.weight, (1, 0)), head.bias)
    return ops.reshape(y, (pooled.shape[0],))


def classify_density(head: ClassificationHead, pooled: Tensor | None = None) -> Tensor:
    """K-way density-level distribution.

    By default the head consumes its own learnable token and ignores the
    image entirely, shape (1, K).  Passing ``pooled`` switches the input
    to the pooled image feature (the ablation variant), shape (B, K).
    """
    source = head.density_token if pooled is None else pooled
    k, d = head.weight.shape
    if source.shape[-1] != d:
        raise ShapeError(f"head expects dim {d}, got {source.shape}")
    logits = ops.linear(source, ops.transpose(head.weight, (1, 0)), head.bias)
    return ops.softmax(logits, axis=1)


def quantize_density_level(c, cfg: DensityLevelConfig):
    """Uniform quantization of a count into a level in {0..K-1}.

    The raw rule floor(K * min(c, c_max) / c_max) emits K when c reaches
    c_max, so the result is clamped to K-1.  Accepts scalars or arrays.
    """
    cfg.validate()
    arr = np.asarray(c, dtype=np.float64)
    if (arr < 0).any():
        raise ValueError("counts must be non-negative")
    raw = np.floor(cfg.num_levels * np.minimum(arr, cfg.c_max) / cfg.c_max)
    levels = np.minimum(raw, cfg.num_levels - 1).astype(np.int64)
    return int(levels) if np.isscalar(c) or arr.ndim == 0 else levels
