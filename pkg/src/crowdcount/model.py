"""The assembled counting model.

Backbone -> final-stage tokens -> pooled feature -> regression head, with
an optional decoupled density-level classification branch.  Ablation
toggles select uniform pooling instead of the learned one and can drop or
rewire the classification branch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ops
from .backbone import BackboneConfig, BackboneParams, backbone_forward, init_backbone_params
from .heads import (
    ClassificationHead,
    DensityLevelConfig,
    RegressionHead,
    classify_density,
    init_classification_head,
    init_regression_head,
    regress_count,
)
from .pooling import (
    DensityPoolParams,
    DensityWeights,
    density_weighted_average,
    global_average_pool,
    init_pool_params,
)
from .rng import seeded_rng
from .tensor import DEFAULT_DTYPE, Tensor

CLS_INPUT_KINDS = ("density_token", "count_feature")


@dataclass
class ModelConfig:
    backbone: BackboneConfig = field(default_factory=BackboneConfig)
    num_levels: int = 10
    use_ldwa: bool = True  # learned density-weighted pooling vs plain averaging
    use_cls_head: bool = True
    cls_input: str = "density_token"

    def __post_init__(self):
        if self.cls_input not in CLS_INPUT_KINDS:
            raise ValueError(f"cls_input must be one of {CLS_INPUT_KINDS}, got {self.cls_input!r}")


@dataclass
class ModelParams:
    """Every learnable tensor, in the declaration order used on disk."""

    backbone: BackboneParams
    pool: DensityPoolParams | None
    reg_head: RegressionHead
    cls_head: ClassificationHead | None


@dataclass
class ModelOutput:
    count: Tensor  # (B,) raw regression output, not clamped
    cls_probs: Tensor | None  # (1, K) decoupled / (B, K) feature-driven
    weights: Tensor  # (B, N) pooling weights, still in the graph
    weights_view: DensityWeights
    pyramid: object


def init_model_params(cfg: ModelConfig, seed: int, dtype=DEFAULT_DTYPE) -> ModelParams:
    rng = seeded_rng(seed)
    d = cfg.backbone.channels[3]
    backbone = init_backbone_params(cfg.backbone, rng, dtype)
    pool = init_pool_params(d, rng, dtype) if cfg.use_ldwa else None
    reg = init_regression_head(d, rng, dtype)
    cls = init_classification_head(d, cfg.num_levels, rng, dtype) if cfg.use_cls_head else None
    return ModelParams(backbone=backbone, pool=pool, reg_head=reg, cls_head=cls)


def model_forward(images: Tensor, params: ModelParams, cfg: ModelConfig) -> ModelOutput:
    pyramid = backbone_forward(images, params.backbone, cfg.backbone)
    t4 = pyramid.final
    b, h, w, d = t4.shape
    tokens = ops.reshape(t4, (b, h * w, d))

    if cfg.use_ldwa:
        pooled, weights, view = density_weighted_average(tokens, params.pool, (h, w))
    else:
        pooled, weights, view = global_average_pool(tokens, (h, w))

    count = regress_count(pooled, params.reg_head)
    cls_probs = None
    if cfg.use_cls_head:
        source = pooled if cfg.cls_input == "count_feature" else None
        cls_probs = classify_density(params.cls_head, pooled=source)
    return ModelOutput(count=count, cls_probs=cls_probs, weights=weights, weights_view=view, pyramid=pyramid)
