"""Shape rules, block semantics, and gradient flow of the backbone."""

import numpy as np
import pytest

from crowdcount import Tensor, backward
from crowdcount import ops
from crowdcount.backbone import (
    AttentionBlockParams,
    BackboneConfig,
    ConfigError,
    attention_block,
    backbone_forward,
    init_backbone_params,
    mbconv_block,
    _attention_params,
    _mbconv_params,
)
from crowdcount.params import named_params
from crowdcount.rng import seeded_rng
from crowdcount.tensor import ShapeError


def tiny_config():
    return BackboneConfig(
        input_size=(32, 32),
        channels=(4, 4, 8, 8),
        blocks_per_stage=(1, 1, 1, 1),
        attention_heads=(2, 2),
        window=4,
    )


class TestConfig:
    def test_rejects_input_not_multiple_of_32(self):
        with pytest.raises(ConfigError, match="multiple of 32"):
            BackboneConfig(input_size=(100, 100))

    def test_rejects_decreasing_channels(self):
        with pytest.raises(ConfigError, match="non-decreasing"):
            BackboneConfig(channels=(32, 16, 64, 128))

    def test_rejects_heads_not_dividing_channels(self):
        with pytest.raises(ConfigError, match="heads"):
            BackboneConfig(channels=(16, 32, 64, 128), attention_heads=(3, 4))

    def test_stage_extents_follow_reduction_rule(self):
        cfg = BackboneConfig(input_size=(128, 128))
        assert cfg.stage_extents() == [(32, 32), (16, 16), (8, 8), (4, 4)]


class TestPyramidShapes:
    def test_default_desk_config_shapes(self):
        cfg = BackboneConfig()  # 128x128, channels (16,32,64,128)
        params = init_backbone_params(cfg, seeded_rng(0))
        img = Tensor(seeded_rng(1).standard_normal((1, 128, 128, 3)).astype(np.float32))
        pyr = backbone_forward(img, params, cfg)
        shapes = [t.shape for t in pyr.stages]
        assert shapes == [(1, 32, 32, 16), (1, 16, 16, 32), (1, 8, 8, 64), (1, 4, 4, 128)]
        assert pyr.final.shape[1] * pyr.final.shape[2] == 16  # N = 16 tokens

    def test_224_input_gives_7x7_final_stage(self):
        cfg = BackboneConfig(input_size=(224, 224), channels=(8, 8, 8, 8), blocks_per_stage=(1, 1, 1, 1), attention_heads=(2, 2))
        params = init_backbone_params(cfg, seeded_rng(0))
        img = Tensor(np.zeros((1, 224, 224, 3), np.float32))
        pyr = backbone_forward(img, params, cfg)
        assert pyr.final.shape == (1, 7, 7, 8)

    def test_wrong_input_size_raises(self):
        cfg = tiny_config()
        params = init_backbone_params(cfg, seeded_rng(0))
        with pytest.raises(ShapeError, match="config wants"):
            backbone_forward(Tensor(np.zeros((1, 64, 64, 3), np.float32)), params, cfg)

    def test_forward_is_deterministic(self):
        cfg = tiny_config()
        params = init_backbone_params(cfg, seeded_rng(0))
        img = Tensor(seeded_rng(2).standard_normal((2, 32, 32, 3)).astype(np.float32))
        a = backbone_forward(img, params, cfg).final.data
        b = backbone_forward(img, params, cfg).final.data
        np.testing.assert_array_equal(a, b)


class TestMBConv:
    def test_zero_weights_reduce_to_identity(self):
        rng = seeded_rng(0)
        p = _mbconv_params(rng, 4, 4, 1, np.float32)
        for _, t in named_params((p.expand, p.depthwise, p.project)):
            t.data[...] = 0.0
        x = Tensor(rng.standard_normal((2, 8, 8, 4)).astype(np.float32))
        out = mbconv_block(x, p)
        np.testing.assert_array_equal(out.data, x.data)

    def test_stride_two_downsamples_and_widens(self):
        rng = seeded_rng(1)
        p = _mbconv_params(rng, 16, 32, 2, np.float32)
        x = Tensor(rng.standard_normal((1, 32, 32, 16)).astype(np.float32))
        assert mbconv_block(x, p).shape == (1, 16, 16, 32)

    def test_stride_one_preserves_shape(self):
        rng = seeded_rng(2)
        p = _mbconv_params(rng, 16, 16, 1, np.float32)
        x = Tensor(rng.standard_normal((1, 32, 32, 16)).astype(np.float32))
        assert mbconv_block(x, p).shape == (1, 32, 32, 16)

    def test_gradient_check_through_block(self):
        from gradcheck import finite_difference_gradient, relative_error

        rng = seeded_rng(3)
        p = _mbconv_params(rng, 2, 2, 1, np.float64)
        x0 = rng.standard_normal((1, 4, 4, 2))
        proj = rng.standard_normal((1, 4, 4, 2))

        def run(x_arr):
            out = mbconv_block(Tensor(x_arr, dtype=np.float64), p)
            return ops.sum(ops.mul(out, Tensor(proj, dtype=np.float64)))

        x = Tensor(x0, requires_grad=True, dtype=np.float64)
        out = mbconv_block(x, p)
        backward(ops.sum(ops.mul(out, Tensor(proj, dtype=np.float64))))
        fd = finite_difference_gradient(lambda arrs: float(run(arrs[0]).item()), [x0], 0)
        assert relative_error(x.grad, fd) < 1e-4


class TestAttention:
    def test_shape_preserved(self):
        rng = seeded_rng(0)
        p = _attention_params(rng, 64, 2, 4.0, np.float32)
        x = Tensor(rng.standard_normal((1, 8, 8, 64)).astype(np.float32))
        assert attention_block(x, p, window=4).shape == (1, 8, 8, 64)

    def test_single_token_window_ignores_query_and_key(self):
        # With one-token windows the attention matrix is [[1]], so the
        # output cannot depend on the q/k projections.
        rng = seeded_rng(1)
        p1 = _attention_params(rng, 8, 2, 2.0, np.float32)
        p2 = AttentionBlockParams(
            norm1=p1.norm1,
            q=_attention_params(seeded_rng(99), 8, 2, 2.0, np.float32).q,
            k=_attention_params(seeded_rng(98), 8, 2, 2.0, np.float32).k,
            v=p1.v,
            out=p1.out,
            norm2=p1.norm2,
            mlp_in=p1.mlp_in,
            mlp_out=p1.mlp_out,
            heads=p1.heads,
        )
        x = Tensor(seeded_rng(2).standard_normal((1, 2, 2, 8)).astype(np.float32))
        a = attention_block(x, p1, window=1).data
        b = attention_block(x, p2, window=1).data
        np.testing.assert_array_equal(a, b)

    def test_window_clamped_to_small_extent(self):
        rng = seeded_rng(3)
        p = _attention_params(rng, 8, 2, 2.0, np.float32)
        x = Tensor(rng.standard_normal((1, 2, 2, 8)).astype(np.float32))
        assert attention_block(x, p, window=4).shape == (1, 2, 2, 8)

    def test_permutation_equivariant_within_window(self):
        rng = seeded_rng(4)
        p = _attention_params(rng, 8, 2, 2.0, np.float64)
        x = rng.standard_normal((1, 4, 4, 8))
        out = attention_block(Tensor(x, dtype=np.float64), p, window=4).data.reshape(16, 8)
        perm = rng.permutation(16)
        xp = x.reshape(16, 8)[perm].reshape(1, 4, 4, 8)
        out_p = attention_block(Tensor(xp, dtype=np.float64), p, window=4).data.reshape(16, 8)
        np.testing.assert_allclose(out_p, out[perm], rtol=1e-10)

    def test_untileable_window_falls_back_to_common_tile(self):
        rng = seeded_rng(5)
        p = _attention_params(rng, 8, 2, 2.0, np.float32)
        x = Tensor(rng.standard_normal((1, 6, 6, 8)).astype(np.float32))
        assert attention_block(x, p, window=4).shape == (1, 6, 6, 8)

    def test_wrong_head_count_raises(self):
        rng = seeded_rng(6)
        p = _attention_params(rng, 8, 2, 2.0, np.float32)
        p.heads = 3
        x = Tensor(np.zeros((1, 4, 4, 8), np.float32))
        with pytest.raises(ConfigError, match="heads"):
            attention_block(x, p, window=4)


class TestGradientFlow:
    def test_every_backbone_parameter_receives_gradient(self):
        from crowdcount.model import ModelConfig, init_model_params, model_forward

        cfg = ModelConfig(backbone=tiny_config())
        params = init_model_params(cfg, seed=0)
        img = Tensor(seeded_rng(6).standard_normal((2, 32, 32, 3)).astype(np.float32))
        out = model_forward(img, params, cfg)
        backward(ops.sum(ops.mul(out.count, out.count)))
        for name, t in named_params(params.backbone, "backbone"):
            assert np.abs(t.grad).max() > 0, f"{name} has an identically zero gradient"
