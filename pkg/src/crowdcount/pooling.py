"""Learned density-weighted token pooling.

Every final-stage token gets a scalar density score from a learned linear
probe; the scores are softmax-normalized over space and the pooled
feature is the resulting convex combination of tokens.  With zero
parameters this degenerates exactly to global average pooling, which is
also the ablation baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ops
from .rng import weight_param, zeros_param
from .tensor import DEFAULT_DTYPE, ShapeError, Tensor


@dataclass
class DensityPoolParams:
    score_weight: Tensor  # (1, d) row projecting a token to its density score
    score_bias: Tensor  # (1,) scalar; softmax makes it inert in the forward pass


@dataclass
class DensityWeights:
    """Normalized per-token spatial weights (non-negative, sum to one)."""

    weights: np.ndarray  # (N_tokens,) for a single image, (B, N_tokens) batched
    source_shape: tuple[int, int]  # (h, w) token grid the weights came from


def init_pool_params(d: int, rng, dtype=DEFAULT_DTYPE) -> DensityPoolParams:
    return DensityPoolParams(weight_param(rng, (1, d), dtype), zeros_param((1,), dtype))


def _check_tokens(tokens: Tensor) -> tuple[int, int, int]:
    if tokens.data.ndim != 3:
        raise ShapeError(f"tokens must be (B, N, d), got {tokens.shape}")
    b, n, d = tokens.shape
    if n < 1:
        raise ShapeError("need at least one token")
    return b, n, d


def density_scores(tokens: Tensor, p: DensityPoolParams) -> Tensor:
    """Per-token scalar scores: <token, w> + b, shape (B, N)."""
    b, n, d = _check_tokens(tokens)
    if p.score_weight.shape != (1, d):
        raise ShapeError(f"score weight {p.score_weight.shape} does not match token dim {d}")
    s = ops.linear(tokens, ops.transpose(p.score_weight, (1, 0)), p.score_bias)
    return ops.reshape(s, (b, n))


def normalize_weights(scores: Tensor) -> Tensor:
    """Softmax over the token axis; rows are non-negative and sum to one."""
    if scores.data.ndim != 2:
        raise ShapeError(f"scores must be (B, N), got {scores.shape}")
    if not np.isfinite(scores.data).all():
        raise ValueError("density scores contain non-finite values")
    return ops.softmax(scores, axis=1)


def aggregate(tokens: Tensor, weights: Tensor) -> Tensor:
    """Convex combination of token rows under the given weights, (B, d)."""
    b, n, d = _check_tokens(tokens)
    if weights.shape != (b, n):
        raise ShapeError(f"weights {weights.shape} do not match tokens ({b}, {n})")
    expanded = ops.reshape(weights, (b, n, 1))
    return ops.sum(ops.mul(tokens, expanded), axis=1)


def density_weighted_average(
    tokens: Tensor, p: DensityPoolParams, grid: tuple[int, int]
) -> tuple[Tensor, Tensor, DensityWeights]:
    """Score, normalize, aggregate; returns (pooled, weights node, weights view).

    The weights stay in the graph (the whole transform is learned end to
    end); the :class:`DensityWeights` copy is for rendering heatmaps
    without a second forward pass.
    """
    w = normalize_weights(density_scores(tokens, p))
    pooled = aggregate(tokens, w)
    view = DensityWeights(weights=np.array(w.data), source_shape=tuple(grid))
    return pooled, w, view


def global_average_pool(tokens: Tensor, grid: tuple[int, int]) -> tuple[Tensor, Tensor, DensityWeights]:
    """Uniform-weight pooling; the ablation replacement for the learned pool."""
    b, n, d = _check_tokens(tokens)
    uniform = Tensor(np.full((b, n), 1.0 / n, dtype=tokens.dtype))
    pooled = ops.mean(tokens, axis=1)
    return pooled, uniform, DensityWeights(np.array(uniform.data), tuple(grid))
