"""Four-stage hierarchical feature extractor.

Stages 1-2 are inverted-bottleneck convolution blocks, stages 3-4 are
pre-norm windowed self-attention blocks; stage ``s`` runs at 1/2^(s+1) of
the input resolution.  Downstream counting consumes only the final stage,
but all four stages are returned for inspection and visualization.

Layout is NHWC throughout; a batch axis is always present, so stage ``s``
has shape (N, H/2^(s+1), W/2^(s+1), C_s).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ops
from .rng import ones_param, weight_param, zeros_param
from .tensor import DEFAULT_DTYPE, ShapeError, Tensor


class ConfigError(ValueError):
    """Invalid model or run configuration."""


@dataclass
class BackboneConfig:
    input_size: tuple[int, int] = (128, 128)
    channels: tuple[int, int, int, int] = (16, 32, 64, 128)
    blocks_per_stage: tuple[int, int, int, int] = (2, 2, 2, 2)
    attention_heads: tuple[int, int] = (2, 4)
    window: int = 4
    mlp_ratio: float = 4.0

    def __post_init__(self):
        if isinstance(self.input_size, int):
            self.input_size = (self.input_size, self.input_size)
        self.input_size = tuple(int(v) for v in self.input_size)
        self.channels = tuple(int(v) for v in self.channels)
        self.blocks_per_stage = tuple(int(v) for v in self.blocks_per_stage)
        self.attention_heads = tuple(int(v) for v in self.attention_heads)
        self.validate()

    def validate(self) -> None:
        h, w = self.input_size
        if h % 32 or w % 32 or h <= 0 or w <= 0:
            raise ConfigError(f"input size {h}x{w} must be a positive multiple of 32")
        if len(self.channels) != 4 or any(c <= 0 for c in self.channels):
            raise ConfigError(f"need four positive channel counts, got {self.channels}")
        if any(a > b for a, b in zip(self.channels, self.channels[1:])):
            raise ConfigError(f"channels must be non-decreasing, got {self.channels}")
        if len(self.blocks_per_stage) != 4 or any(b <= 0 for b in self.blocks_per_stage):
            raise ConfigError(f"need four positive block counts, got {self.blocks_per_stage}")
        if len(self.attention_heads) != 2 or any(h <= 0 for h in self.attention_heads):
            raise ConfigError(f"need heads for stages 3 and 4, got {self.attention_heads}")
        for heads, ch in zip(self.attention_heads, self.channels[2:]):
            if ch % heads:
                raise ConfigError(f"{heads} heads do not divide {ch} channels")
        if self.window < 1:
            raise ConfigError(f"window must be positive, got {self.window}")
        if self.mlp_ratio <= 0:
            raise ConfigError(f"mlp_ratio must be positive, got {self.mlp_ratio}")

    def stage_extents(self) -> list[tuple[int, int]]:
        h, w = self.input_size
        return [(h >> (s + 1), w >> (s + 1)) for s in range(1, 5)]


# -- parameter containers -----------------------------------------------------


@dataclass
class ConvParams:
    weight: Tensor  # (KH, KW, Cin/groups, Cout)
    bias: Tensor


@dataclass
class DepthwiseParams:
    weight: Tensor  # (KH, KW, C)
    bias: Tensor


@dataclass
class NormParams:
    gamma: Tensor
    beta: Tensor


@dataclass
class LinearParams:
    weight: Tensor  # (d_in, d_out)
    bias: Tensor


@dataclass
class PatchEmbedParams:
    conv1: ConvParams
    conv2: ConvParams


@dataclass
class MBConvParams:
    expand: ConvParams
    depthwise: DepthwiseParams
    project: ConvParams
    norm: NormParams
    stride: int = 1


@dataclass
class AttentionBlockParams:
    norm1: NormParams
    q: LinearParams
    k: LinearParams
    v: LinearParams
    out: LinearParams
    norm2: NormParams
    mlp_in: LinearParams
    mlp_out: LinearParams
    heads: int = 1


@dataclass
class BackboneParams:
    patch: PatchEmbedParams
    stage1: list[MBConvParams] = field(default_factory=list)
    down1: MBConvParams | None = None
    stage2: list[MBConvParams] = field(default_factory=list)
    down2: MBConvParams | None = None
    stage3: list[AttentionBlockParams] = field(default_factory=list)
    down3: MBConvParams | None = None
    stage4: list[AttentionBlockParams] = field(default_factory=list)


@dataclass
class TokenPyramid:
    """The four stage outputs; counting reads ``stages[3]``."""

    stages: tuple[Tensor, Tensor, Tensor, Tensor]

    @property
    def final(self) -> Tensor:
        return self.stages[3]


EXPANSION = 4  # inverted-bottleneck expansion factor


def _conv_params(rng, kh, kw, cin, cout, dtype) -> ConvParams:
    return ConvParams(weight_param(rng, (kh, kw, cin, cout), dtype), zeros_param((cout,), dtype))


def _depthwise_params(rng, k, c, dtype) -> DepthwiseParams:
    return DepthwiseParams(weight_param(rng, (k, k, c), dtype), zeros_param((c,), dtype))


def _norm_params(c, dtype) -> NormParams:
    return NormParams(ones_param((c,), dtype), zeros_param((c,), dtype))


def _linear_params(rng, din, dout, dtype) -> LinearParams:
    return LinearParams(weight_param(rng, (din, dout), dtype), zeros_param((dout,), dtype))


def _mbconv_params(rng, cin, cout, stride, dtype) -> MBConvParams:
    mid = EXPANSION * cin
    return MBConvParams(
        expand=_conv_params(rng, 1, 1, cin, mid, dtype),
        depthwise=_depthwise_params(rng, 3, mid, dtype),
        project=_conv_params(rng, 1, 1, mid, cout, dtype),
        norm=_norm_params(cout, dtype),
        stride=stride,
    )


def _attention_params(rng, c, heads, mlp_ratio, dtype) -> AttentionBlockParams:
    hidden = int(round(mlp_ratio * c))
    return AttentionBlockParams(
        norm1=_norm_params(c, dtype),
        q=_linear_params(rng, c, c, dtype),
        k=_linear_params(rng, c, c, dtype),
        v=_linear_params(rng, c, c, dtype),
        out=_linear_params(rng, c, c, dtype),
        norm2=_norm_params(c, dtype),
        mlp_in=_linear_params(rng, c, hidden, dtype),
        mlp_out=_linear_params(rng, hidden, c, dtype),
        heads=heads,
    )


def init_backbone_params(cfg: BackboneConfig, rng, dtype=DEFAULT_DTYPE) -> BackboneParams:
    c1, c2, c3, c4 = cfg.channels
    b1, b2, b3, b4 = cfg.blocks_per_stage
    h3, h4 = cfg.attention_heads
    stem = max(c1 // 2, 1)
    return BackboneParams(
        patch=PatchEmbedParams(
            conv1=_conv_params(rng, 3, 3, 3, stem, dtype),
            conv2=_conv_params(rng, 3, 3, stem, c1, dtype),
        ),
        stage1=[_mbconv_params(rng, c1, c1, 1, dtype) for _ in range(b1)],
        down1=_mbconv_params(rng, c1, c2, 2, dtype),
        stage2=[_mbconv_params(rng, c2, c2, 1, dtype) for _ in range(b2)],
        down2=_mbconv_params(rng, c2, c3, 2, dtype),
        stage3=[_attention_params(rng, c3, h3, cfg.mlp_ratio, dtype) for _ in range(b3)],
        down3=_mbconv_params(rng, c3, c4, 2, dtype),
        stage4=[_attention_params(rng, c4, h4, cfg.mlp_ratio, dtype) for _ in range(b4)],
    )


# -- forward passes -----------------------------------------------------------


def patch_embed(image: Tensor, p: PatchEmbedParams) -> Tensor:
    """Two stride-2 3x3 convolutions, each followed by GELU; quarters the extent."""
    x = ops.gelu(ops.conv2d(image, p.conv1.weight, p.conv1.bias, stride=2, padding=1))
    return ops.gelu(ops.conv2d(x, p.conv2.weight, p.conv2.bias, stride=2, padding=1))


def mbconv_block(x: Tensor, p: MBConvParams) -> Tensor:
    """Inverted bottleneck: expand, depthwise (optionally strided), project.

    The projected output is renormalized against the batch statistics; the
    residual path is added whenever input and output shapes match.
    """
    h = ops.gelu(ops.conv2d(x, p.expand.weight, p.expand.bias))
    h = ops.gelu(ops.depthwise_conv2d(h, p.depthwise.weight, p.depthwise.bias, stride=p.stride, padding=1))
    h = ops.conv2d(h, p.project.weight, p.project.bias)
    h = ops.batch_stat_norm(h, p.norm.gamma, p.norm.beta)
    if h.shape == x.shape:
        h = ops.add(h, x)
    return h


def attention_block(x: Tensor, p: AttentionBlockParams, window: int) -> Tensor:
    """Pre-norm windowed multi-head self-attention plus a pre-norm MLP."""
    n, h, w, c = x.shape
    win = min(window, h, w)
    if h % win or w % win:
        # configured window does not tile this stage: use the largest common tile
        win = int(np.gcd(h, w))
    if c % p.heads:
        raise ConfigError(f"{p.heads} heads do not divide {c} channels")
    hd = c // p.heads
    grid = (h // win, w // win)
    t = win * win

    normed = ops.layer_norm(x, p.norm1.gamma, p.norm1.beta)
    tokens = ops.reshape(ops.window_partition(normed, win), (-1, t, c))
    nw = tokens.shape[0]

    def split_heads(lin: LinearParams) -> Tensor:
        y = ops.linear(tokens, lin.weight, lin.bias)
        y = ops.reshape(y, (nw, t, p.heads, hd))
        return ops.reshape(ops.transpose(y, (0, 2, 1, 3)), (nw * p.heads, t, hd))

    q, k, v = split_heads(p.q), split_heads(p.k), split_heads(p.v)
    scores = ops.scalar_mul(ops.matmul(q, ops.transpose(k, (0, 2, 1))), 1.0 / np.sqrt(hd))
    attn = ops.softmax(scores, axis=2)
    ctx = ops.matmul(attn, v)
    ctx = ops.transpose(ops.reshape(ctx, (nw, p.heads, t, hd)), (0, 2, 1, 3))
    ctx = ops.linear(ops.reshape(ctx, (nw, t, c)), p.out.weight, p.out.bias)
    merged = ops.window_merge(ops.reshape(ctx, (nw, win, win, c)), win, grid)
    x = ops.add(x, merged)

    m = ops.layer_norm(x, p.norm2.gamma, p.norm2.beta)
    m = ops.linear(ops.gelu(ops.linear(m, p.mlp_in.weight, p.mlp_in.bias)), p.mlp_out.weight, p.mlp_out.bias)
    return ops.add(x, m)


def backbone_forward(image: Tensor, params: BackboneParams, cfg: BackboneConfig) -> TokenPyramid:
    """Run all four stages and return the full token pyramid."""
    if image.data.ndim != 4 or image.shape[3] != 3:
        raise ShapeError(f"expected image batch (N,H,W,3), got {image.shape}")
    if image.shape[1:3] != cfg.input_size:
        raise ShapeError(f"image is {image.shape[1]}x{image.shape[2]}, config wants {cfg.input_size}")

    x = patch_embed(image, params.patch)
    for blk in params.stage1:
        x = mbconv_block(x, blk)
    t1 = x
    x = mbconv_block(x, params.down1)
    for blk in params.stage2:
        x = mbconv_block(x, blk)
    t2 = x
    x = mbconv_block(x, params.down2)
    for blk in params.stage3:
        x = attention_block(x, blk, cfg.window)
    t3 = x
    x = mbconv_block(x, params.down3)
    for blk in params.stage4:
        x = attention_block(x, blk, cfg.window)
    return TokenPyramid(stages=(t1, t2, t3, x))
