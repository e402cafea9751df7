"""Forward oracles, shape rules, and graph semantics of the tensor core."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crowdcount import GraphError, ShapeError, Tensor, backward, no_grad
from crowdcount import ops
from crowdcount.rng import seeded_rng

from oracles import naive_conv2d, naive_depthwise_conv2d, naive_matmul


class TestForwardOracles:
    def test_matmul_identity(self):
        x = np.arange(6, dtype=np.float64).reshape(2, 3)
        eye = Tensor(np.eye(2), dtype=np.float64)
        out = ops.matmul(eye, Tensor(x, dtype=np.float64))
        np.testing.assert_array_equal(out.data, x)

    def test_matmul_matches_naive_oracle(self):
        rng = seeded_rng(1)
        for _ in range(10):
            m, k, n = rng.integers(1, 6, size=3)
            a = rng.standard_normal((m, k))
            b = rng.standard_normal((k, n))
            got = ops.matmul(Tensor(a, dtype=np.float64), Tensor(b, dtype=np.float64)).data
            want = naive_matmul(a, b)
            np.testing.assert_allclose(got, want, rtol=1e-6)

    def test_conv2d_shape_rule(self):
        # floor((8 + 2*1 - 3)/2) + 1 = 4
        x = Tensor(np.zeros((1, 8, 8, 3), np.float64))
        w = Tensor(np.zeros((3, 3, 3, 4), np.float64))
        out = ops.conv2d(x, w, stride=2, padding=1)
        assert out.shape == (1, 4, 4, 4)

    def test_conv2d_matches_naive_oracle(self):
        rng = seeded_rng(2)
        for _ in range(8):
            stride = int(rng.integers(1, 3))
            padding = int(rng.integers(0, 2))
            groups = int(rng.choice([1, 2]))
            cin, cout = 2 * groups, 2 * groups
            kh = int(rng.integers(1, 4))
            x = rng.standard_normal((2, 6, 5, cin))
            w = rng.standard_normal((kh, kh, cin // groups, cout))
            b = rng.standard_normal(cout)
            got = ops.conv2d(
                Tensor(x, dtype=np.float64), Tensor(w, dtype=np.float64), Tensor(b, dtype=np.float64),
                stride=stride, padding=padding, groups=groups,
            ).data
            want = naive_conv2d(x, w, b, stride=stride, padding=padding, groups=groups)
            np.testing.assert_allclose(got, want, rtol=1e-6)

    def test_depthwise_matches_naive_oracle(self):
        rng = seeded_rng(3)
        for _ in range(8):
            stride = int(rng.integers(1, 3))
            padding = int(rng.integers(0, 2))
            c = int(rng.integers(1, 5))
            x = rng.standard_normal((2, 6, 6, c))
            w = rng.standard_normal((3, 3, c))
            got = ops.depthwise_conv2d(
                Tensor(x, dtype=np.float64), Tensor(w, dtype=np.float64), stride=stride, padding=padding
            ).data
            want = naive_depthwise_conv2d(x, w, stride=stride, padding=padding)
            np.testing.assert_allclose(got, want, rtol=1e-6)

    def test_softmax_uniform_case(self):
        out = ops.softmax(Tensor([0.0, 0.0, 0.0, 0.0], dtype=np.float64), axis=0)
        np.testing.assert_allclose(out.data, [0.25, 0.25, 0.25, 0.25], atol=1e-12)

    def test_primitive_forward_dispatch(self):
        out = ops.primitive_forward("relu", [Tensor([-1.0, 2.0])])
        np.testing.assert_array_equal(out.data, [0.0, 2.0])
        with pytest.raises(ValueError, match="unknown primitive"):
            ops.primitive_forward("frobnicate", [])


class TestSoftmaxProperties:
    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.floats(min_value=-30, max_value=30), min_size=1, max_size=12),
        st.floats(min_value=-50, max_value=50),
    )
    def test_normalized_nonnegative_and_shift_invariant(self, values, shift):
        x = np.array(values, dtype=np.float64)
        y = ops.softmax(Tensor(x), axis=0).data
        y_shifted = ops.softmax(Tensor(x + shift), axis=0).data
        assert (y >= 0).all()
        assert abs(y.sum() - 1.0) < 1e-6
        np.testing.assert_allclose(y, y_shifted, atol=1e-6)


class TestShapeErrors:
    def test_add_shape_mismatch(self):
        with pytest.raises(ShapeError):
            ops.add(Tensor(np.zeros((2, 3))), Tensor(np.zeros((3, 2))))

    def test_add_rejects_true_broadcast(self):
        # (3,1) + (1,4) would create a brand-new (3,4) shape
        with pytest.raises(ShapeError):
            ops.add(Tensor(np.zeros((3, 1))), Tensor(np.zeros((1, 4))))

    def test_matmul_inner_dim_mismatch(self):
        with pytest.raises(ShapeError, match="inner dims"):
            ops.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((4, 2))))

    def test_softmax_empty_axis(self):
        with pytest.raises(ShapeError, match="empty axis"):
            ops.softmax(Tensor(np.zeros((2, 0))), axis=1)

    def test_conv_nonpositive_stride(self):
        x = Tensor(np.zeros((1, 4, 4, 2)))
        w = Tensor(np.zeros((3, 3, 2, 2)))
        with pytest.raises(ValueError, match="stride"):
            ops.conv2d(x, w, stride=0)

    def test_log_rejects_nonpositive(self):
        with pytest.raises(ValueError, match="positive"):
            ops.log(Tensor([1.0, 0.0]))

    def test_mixed_dtypes_rejected(self):
        with pytest.raises(ShapeError, match="mixed dtypes"):
            ops.add(Tensor([1.0], dtype=np.float32), Tensor([1.0], dtype=np.float64))


class TestBackward:
    def test_sum_of_squares_gradient(self):
        x = Tensor([1.0, 2.0, 3.0], requires_grad=True, dtype=np.float64)
        loss = ops.sum(ops.mul(x, x))
        backward(loss)
        np.testing.assert_array_equal(x.grad, [2.0, 4.0, 6.0])

    def test_unreachable_parameter_gets_zero_gradient(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        orphan = Tensor([5.0], requires_grad=True)
        loss = ops.sum(ops.mul(x, x))
        backward(loss)
        np.testing.assert_array_equal(orphan.grad, [0.0])

    def test_loss_must_be_scalar(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        y = ops.mul(x, x)
        with pytest.raises(GraphError, match="scalar"):
            backward(y)

    def test_graph_consumed_error(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        loss = ops.sum(ops.mul(x, x))
        backward(loss)
        with pytest.raises(GraphError, match="consumed"):
            backward(loss)

    def test_backward_is_deterministic(self):
        rng = seeded_rng(7)
        a = rng.standard_normal((4, 4))

        def run():
            x = Tensor(a, requires_grad=True, dtype=np.float64)
            h = ops.gelu(ops.matmul(x, x))
            loss = ops.sum(ops.mul(h, h))
            backward(loss)
            return x.grad.copy()

        g1, g2 = run(), run()
        np.testing.assert_array_equal(g1, g2)

    def test_diamond_graph_accumulates_both_paths(self):
        x = Tensor([2.0], requires_grad=True, dtype=np.float64)
        y = ops.mul(x, x)
        loss = ops.sum(ops.add(y, y))
        backward(loss)
        np.testing.assert_allclose(x.grad, [8.0])

    def test_no_grad_suppresses_graph(self):
        x = Tensor([1.0], requires_grad=True)
        with no_grad():
            y = ops.mul(x, x)
        assert y.is_leaf() and not y.requires_grad

    def test_requires_grad_leaf_starts_at_zero(self):
        t = Tensor(np.ones((2, 2)), requires_grad=True)
        np.testing.assert_array_equal(t.grad, np.zeros((2, 2)))


class TestRngInit:
    def test_same_seed_identical_draws(self):
        a = seeded_rng(42).standard_normal(100)
        b = seeded_rng(42).standard_normal(100)
        np.testing.assert_array_equal(a, b)

    def test_truncated_normal_statistics(self):
        from crowdcount.rng import truncated_normal

        draws = truncated_normal(seeded_rng(0), (10**5,), std=1.0, clip=2.0)
        assert np.abs(draws).max() <= 2.0
        assert abs(draws.mean()) < 0.01

    def test_truncated_normal_deterministic(self):
        from crowdcount.rng import truncated_normal

        a = truncated_normal(seeded_rng(5), (1000,))
        b = truncated_normal(seeded_rng(5), (1000,))
        np.testing.assert_array_equal(a, b)
