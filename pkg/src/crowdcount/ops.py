"""Differentiable primitives.

The operation set is fixed and small; every network in this package is a
composition of these functions.  Each primitive validates its operand
shapes, computes the forward value with numpy (or a numba kernel for the
depthwise convolution), and registers a backward closure on the output.

Broadcasting is deliberately restricted: elementwise ops accept operands
whose broadcast result equals one of the operand shapes (covers
scalar-with-tensor and bias-style adds) and nothing more exotic.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .tensor import GraphError, ShapeError, Tensor, accumulate_grad, make_node

_GELU_C = math.sqrt(2.0 / math.pi)
_GELU_A = 0.044715


def _check_dtypes(*tensors: Tensor) -> None:
    dtypes = {t.dtype for t in tensors}
    if len(dtypes) > 1:
        raise ShapeError(f"mixed dtypes in one primitive: {sorted(str(d) for d in dtypes)}")


def _broadcast_shape(a: Tensor, b: Tensor, op: str) -> tuple:
    try:
        out_shape = np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not broadcast") from None
    if out_shape != a.shape and out_shape != b.shape:
        raise ShapeError(
            f"{op}: broadcast of {a.shape} and {b.shape} would create new shape "
            f"{out_shape}; only scalar and bias-style broadcasts are supported"
        )
    return out_shape


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a gradient over the axes that were broadcast in the forward pass."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


# -- elementwise arithmetic ---------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_dtypes(a, b)
    _broadcast_shape(a, b, "add")
    out = a.data + b.data

    def backward(g):
        if a.requires_grad:
            accumulate_grad(a, _unbroadcast(g, a.shape))
        if b.requires_grad:
            accumulate_grad(b, _unbroadcast(g, b.shape))

    return make_node(out, (a, b), backward, "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_dtypes(a, b)
    _broadcast_shape(a, b, "sub")
    out = a.data - b.data

    def backward(g):
        if a.requires_grad:
            accumulate_grad(a, _unbroadcast(g, a.shape))
        if b.requires_grad:
            accumulate_grad(b, _unbroadcast(-g, b.shape))

    return make_node(out, (a, b), backward, "sub")


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_dtypes(a, b)
    _broadcast_shape(a, b, "mul")
    ad, bd = a.data, b.data
    out = ad * bd

    def backward(g):
        if a.requires_grad:
            accumulate_grad(a, _unbroadcast(g * bd, a.shape))
        if b.requires_grad:
            accumulate_grad(b, _unbroadcast(g * ad, b.shape))

    return make_node(out, (a, b), backward, "mul")


def scalar_mul(x: Tensor, c: float) -> Tensor:
    c = float(c)
    out = x.data * c

    def backward(g):
        if x.requires_grad:
            accumulate_grad(x, g * c)

    return make_node(out, (x,), backward, "scalar_mul")


def scalar_add(x: Tensor, c: float) -> Tensor:
    """Convenience wrapper: add a python scalar (a degenerate bias add)."""
    return add(x, Tensor(np.asarray(float(c), dtype=x.dtype)))


# -- matrix products ----------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    _check_dtypes(a, b)
    if a.data.ndim == 2 and b.data.ndim == 2:
        if a.shape[1] != b.shape[0]:
            raise ShapeError(f"matmul: inner dims differ, {a.shape} @ {b.shape}")
    elif a.data.ndim == 3 and b.data.ndim == 3:
        if a.shape[0] != b.shape[0] or a.shape[2] != b.shape[1]:
            raise ShapeError(f"matmul: batched shapes incompatible, {a.shape} @ {b.shape}")
    else:
        raise ShapeError(f"matmul supports 2-D or batched 3-D operands, got {a.shape} @ {b.shape}")
    ad, bd = a.data, b.data
    out = ad @ bd

    def backward(g):
        if ad.ndim == 2:
            if a.requires_grad:
                accumulate_grad(a, g @ bd.T)
            if b.requires_grad:
                accumulate_grad(b, ad.T @ g)
        else:
            if a.requires_grad:
                accumulate_grad(a, g @ bd.transpose(0, 2, 1))
            if b.requires_grad:
                accumulate_grad(b, ad.transpose(0, 2, 1) @ g)

    return make_node(out, (a, b), backward, "matmul")


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """Affine map on the last axis: ``y = x @ w + b`` with w of shape (d_in, d_out)."""
    _check_dtypes(*( (x, w, b) if b is not None else (x, w) ))
    if w.data.ndim != 2 or x.shape[-1] != w.shape[0]:
        raise ShapeError(f"linear: x {x.shape} incompatible with w {w.shape}")
    if b is not None and b.shape != (w.shape[1],):
        raise ShapeError(f"linear: bias {b.shape} must be ({w.shape[1]},)")
    lead = x.shape[:-1]
    x2 = x.data.reshape(-1, x.shape[-1])
    out = x2 @ w.data
    if b is not None:
        out += b.data
    out = out.reshape(*lead, w.shape[1])

    def backward(g):
        g2 = g.reshape(-1, g.shape[-1])
        if x.requires_grad:
            accumulate_grad(x, (g2 @ w.data.T).reshape(x.shape))
        if w.requires_grad:
            accumulate_grad(w, x2.T @ g2)
        if b is not None and b.requires_grad:
            accumulate_grad(b, g2.sum(axis=0))

    parents = (x, w) if b is None else (x, w, b)
    return make_node(out, parents, backward, "linear")


# -- convolutions (NHWC) ------------------------------------------------------


def _conv_checks(x: Tensor, stride: int, padding: int) -> None:
    if x.data.ndim != 4:
        raise ShapeError(f"conv expects NHWC input, got shape {x.shape}")
    if not isinstance(stride, int) or stride < 1:
        raise ValueError(f"conv stride must be a positive integer, got {stride}")
    if not isinstance(padding, int) or padding < 0:
        raise ValueError(f"conv padding must be a non-negative integer, got {padding}")


def _out_extent(size: int, k: int, stride: int, padding: int) -> int:
    out = (size + 2 * padding - k) // stride + 1
    if out < 1:
        raise ShapeError(f"conv kernel {k} does not fit input extent {size} with padding {padding}")
    return out


def conv2d(
    x: Tensor,
    w: Tensor,
    b: Tensor | None = None,
    stride: int = 1,
    padding: int = 0,
    groups: int = 1,
) -> Tensor:
    """2-D convolution, input (N,H,W,Cin), kernel (KH,KW,Cin/groups,Cout)."""
    _check_dtypes(*( (x, w, b) if b is not None else (x, w) ))
    _conv_checks(x, stride, padding)
    if w.data.ndim != 4:
        raise ShapeError(f"conv2d kernel must be (KH,KW,Cin/groups,Cout), got {w.shape}")
    n, h, wd, cin = x.shape
    kh, kw, cin_g, cout = w.shape
    if groups < 1 or cin % groups or cout % groups:
        raise ShapeError(f"conv2d: groups={groups} must divide Cin={cin} and Cout={cout}")
    if cin_g != cin // groups:
        raise ShapeError(f"conv2d: kernel expects {cin_g} input channels/group, input has {cin // groups}")
    if b is not None and b.shape != (cout,):
        raise ShapeError(f"conv2d: bias {b.shape} must be ({cout},)")
    oh = _out_extent(h, kh, stride, padding)
    ow = _out_extent(wd, kw, stride, padding)
    cout_g = cout // groups

    if kh == 1 and kw == 1 and stride == 1 and padding == 0 and groups == 1:
        # Pointwise convolution is a gemm.
        x2 = x.data.reshape(-1, cin)
        w2 = w.data.reshape(cin, cout)
        out = x2 @ w2
        if b is not None:
            out += b.data
        out = out.reshape(n, oh, ow, cout)

        def backward(g):
            g2 = g.reshape(-1, cout)
            if x.requires_grad:
                accumulate_grad(x, (g2 @ w2.T).reshape(x.shape))
            if w.requires_grad:
                accumulate_grad(w, (x2.T @ g2).reshape(w.shape))
            if b is not None and b.requires_grad:
                accumulate_grad(b, g2.sum(axis=0))

        parents = (x, w) if b is None else (x, w, b)
        return make_node(out, parents, backward, "conv2d")

    xp = np.pad(x.data, ((0, 0), (padding, padding), (padding, padding), (0, 0))) if padding else x.data
    out = np.zeros((n, oh, ow, cout), x.dtype)
    for i in range(kh):
        for j in range(kw):
            xs = xp[:, i : i + oh * stride : stride, j : j + ow * stride : stride, :]
            for g_idx in range(groups):
                ci = slice(g_idx * cin_g, (g_idx + 1) * cin_g)
                co = slice(g_idx * cout_g, (g_idx + 1) * cout_g)
                out[..., co] += np.tensordot(xs[..., ci], w.data[i, j, :, co], axes=([3], [0]))
    if b is not None:
        out += b.data

    def backward(g):
        if w.requires_grad:
            dw = np.zeros_like(w.data)
        if x.requires_grad:
            dxp = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                xs = xp[:, i : i + oh * stride : stride, j : j + ow * stride : stride, :]
                for g_idx in range(groups):
                    ci = slice(g_idx * cin_g, (g_idx + 1) * cin_g)
                    co = slice(g_idx * cout_g, (g_idx + 1) * cout_g)
                    gg = g[..., co]
                    if w.requires_grad:
                        dw[i, j, :, co] = np.tensordot(xs[..., ci], gg, axes=([0, 1, 2], [0, 1, 2]))
                    if x.requires_grad:
                        dxp[:, i : i + oh * stride : stride, j : j + ow * stride : stride, ci] += np.tensordot(
                            gg, w.data[i, j, :, co], axes=([3], [1])
                        )
        if w.requires_grad:
            accumulate_grad(w, dw)
        if x.requires_grad:
            dx = dxp[:, padding : padding + h, padding : padding + wd, :] if padding else dxp
            accumulate_grad(x, dx)
        if b is not None and b.requires_grad:
            accumulate_grad(b, g.sum(axis=(0, 1, 2)))

    parents = (x, w) if b is None else (x, w, b)
    return make_node(out, parents, backward, "conv2d")


def depthwise_conv2d(
    x: Tensor,
    w: Tensor,
    b: Tensor | None = None,
    stride: int = 1,
    padding: int = 0,
) -> Tensor:
    """Per-channel 2-D convolution, kernel (KH,KW,C) over input (N,H,W,C)."""
    _check_dtypes(*( (x, w, b) if b is not None else (x, w) ))
    _conv_checks(x, stride, padding)
    if w.data.ndim != 3:
        raise ShapeError(f"depthwise kernel must be (KH,KW,C), got {w.shape}")
    n, h, wd, c = x.shape
    kh, kw, ck = w.shape
    if ck != c:
        raise ShapeError(f"depthwise: kernel channels {ck} != input channels {c}")
    if b is not None and b.shape != (c,):
        raise ShapeError(f"depthwise: bias {b.shape} must be ({c},)")
    oh = _out_extent(h, kh, stride, padding)
    ow = _out_extent(wd, kw, stride, padding)
    xp = np.pad(x.data, ((0, 0), (padding, padding), (padding, padding), (0, 0))) if padding else x.data
    xp = np.ascontiguousarray(xp)
    out = _kernels.dwconv2d_forward(xp, w.data, oh, ow, stride)
    if b is not None:
        out += b.data

    def backward(g):
        g = np.ascontiguousarray(g)
        if x.requires_grad:
            dxp = _kernels.dwconv2d_input_grad(g, w.data, xp.shape[1], xp.shape[2], stride)
            dx = dxp[:, padding : padding + h, padding : padding + wd, :] if padding else dxp
            accumulate_grad(x, dx)
        if w.requires_grad:
            accumulate_grad(w, _kernels.dwconv2d_weight_grad(xp, g, kh, kw, stride))
        if b is not None and b.requires_grad:
            accumulate_grad(b, g.sum(axis=(0, 1, 2)))

    parents = (x, w) if b is None else (x, w, b)
    return make_node(out, parents, backward, "depthwise_conv2d")


# -- activations --------------------------------------------------------------


def relu(x: Tensor) -> Tensor:
    xd = x.data
    out = np.maximum(xd, 0)

    def backward(g):
        if x.requires_grad:
            accumulate_grad(x, g * (xd > 0))

    return make_node(out, (x,), backward, "relu")


def gelu(x: Tensor) -> Tensor:
    """Gaussian error linear unit, tanh form."""
    xd = x.data
    inner = _GELU_C * (xd + _GELU_A * xd * xd * xd)
    t = np.tanh(inner)
    out = 0.5 * xd * (1.0 + t)

    def backward(g):
        if x.requires_grad:
            dinner = _GELU_C * (1.0 + 3.0 * _GELU_A * xd * xd)
            accumulate_grad(x, g * (0.5 * (1.0 + t) + 0.5 * xd * (1.0 - t * t) * dinner))

    return make_node(out, (x,), backward, "gelu")


def sigmoid(x: Tensor) -> Tensor:
    xd = x.data
    z = np.exp(-np.abs(xd))
    out = np.where(xd >= 0, 1.0 / (1.0 + z), z / (1.0 + z))

    def backward(g):
        if x.requires_grad:
            accumulate_grad(x, g * out * (1.0 - out))

    return make_node(out, (x,), backward, "sigmoid")


def huber_elementwise(x: Tensor) -> Tensor:
    """Elementwise smooth-L1: quadratic below 1, linear above, continuous at 1."""
    xd = x.data
    a = np.abs(xd)
    out = np.where(a < 1.0, 0.5 * xd * xd, a - 0.5)

    def backward(g):
        if x.requires_grad:
            accumulate_grad(x, g * np.clip(xd, -1.0, 1.0))

    return make_node(out, (x,), backward, "huber_elementwise")


# -- exponentials and normalizations ------------------------------------------


def exp(x: Tensor) -> Tensor:
    with np.errstate(over="ignore"):
        out = np.exp(x.data)
    if not np.isfinite(out).all():
        raise ValueError("exp overflowed to a non-finite value")

    def backward(g):
        if x.requires_grad:
            accumulate_grad(x, g * out)

    return make_node(out, (x,), backward, "exp")


def log(x: Tensor) -> Tensor:
    xd = x.data
    if xd.size and xd.min() <= 0.0:
        raise ValueError("log requires strictly positive inputs")
    out = np.log(xd)

    def backward(g):
        if x.requires_grad:
            accumulate_grad(x, g / xd)

    return make_node(out, (x,), backward, "log")


def _norm_axis(axis: int, ndim: int, op: str) -> int:
    if not isinstance(axis, int):
        raise ValueError(f"{op}: axis must be an integer, got {axis!r}")
    if axis < 0:
        axis += ndim
    if not 0 <= axis < ndim:
        raise ShapeError(f"{op}: axis {axis} out of range for {ndim}-d input")
    return axis


def softmax(x: Tensor, axis: int) -> Tensor:
    axis = _norm_axis(axis, x.data.ndim, "softmax")
    if x.shape[axis] == 0:
        raise ShapeError("softmax over an empty axis")
    xd = x.data
    shifted = xd - xd.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        if x.requires_grad:
            inner = (g * out).sum(axis=axis, keepdims=True)
            accumulate_grad(x, out * (g - inner))

    return make_node(out, (x,), backward, "softmax")


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift per channel."""
    _check_dtypes(x, gamma, beta)
    c = x.shape[-1]
    if gamma.shape != (c,) or beta.shape != (c,):
        raise ShapeError(f"layer_norm: gamma/beta must be ({c},), got {gamma.shape}/{beta.shape}")
    xd = x.data
    m = xd.mean(axis=-1, keepdims=True)
    centered = xd - m
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv
    out = xhat * gamma.data + beta.data

    def backward(g):
        if gamma.requires_grad:
            accumulate_grad(gamma, (g * xhat).sum(axis=tuple(range(xd.ndim - 1))))
        if beta.requires_grad:
            accumulate_grad(beta, g.sum(axis=tuple(range(xd.ndim - 1))))
        if x.requires_grad:
            dxhat = g * gamma.data
            term1 = dxhat.mean(axis=-1, keepdims=True)
            term2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
            accumulate_grad(x, inv * (dxhat - term1 - xhat * term2))

    return make_node(out, (x, gamma, beta), backward, "layer_norm")


def batch_stat_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize each channel by the statistics of the current batch.

    Reduces over every axis except the last (channel) one.  There are no
    running statistics: evaluation uses the same batch-derived values,
    which keeps the op a pure function of its inputs.
    """
    _check_dtypes(x, gamma, beta)
    if x.data.ndim < 2:
        raise ShapeError(f"batch_stat_norm expects at least 2-d input, got {x.shape}")
    c = x.shape[-1]
    if gamma.shape != (c,) or beta.shape != (c,):
        raise ShapeError(f"batch_stat_norm: gamma/beta must be ({c},), got {gamma.shape}/{beta.shape}")
    axes = tuple(range(x.data.ndim - 1))
    xd = x.data
    m = xd.mean(axis=axes)
    centered = xd - m
    var = (centered * centered).mean(axis=axes)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv
    out = xhat * gamma.data + beta.data

    def backward(g):
        if gamma.requires_grad:
            accumulate_grad(gamma, (g * xhat).sum(axis=axes))
        if beta.requires_grad:
            accumulate_grad(beta, g.sum(axis=axes))
        if x.requires_grad:
            dxhat = g * gamma.data
            term1 = dxhat.mean(axis=axes)
            term2 = (dxhat * xhat).mean(axis=axes)
            accumulate_grad(x, inv * (dxhat - term1 - xhat * term2))

    return make_node(out, (x, gamma, beta), backward, "batch_stat_norm")


# -- reductions ---------------------------------------------------------------


def _reduce_axes(axis, ndim: int, op: str):
    if axis is None:
        return None
    if isinstance(axis, int):
        axis = (axis,)
    axes = tuple(_norm_axis(a, ndim, op) for a in axis)
    if len(set(axes)) != len(axes):
        raise ValueError(f"{op}: repeated axis in {axis!r}")
    return axes


def sum(x: Tensor, axis=None) -> Tensor:  # noqa: A001 - mirrors the primitive name
    axes = _reduce_axes(axis, x.data.ndim, "sum")
    out = x.data.sum(axis=axes)

    def backward(g):
        if x.requires_grad:
            accumulate_grad(x, _spread(g, x.shape, axes))

    return make_node(out, (x,), backward, "sum")


def mean(x: Tensor, axis=None) -> Tensor:
    axes = _reduce_axes(axis, x.data.ndim, "mean")
    if x.size == 0:
        raise ShapeError("mean of an empty tensor")
    out = x.data.mean(axis=axes)
    count = x.size if axes is None else int(np.prod([x.shape[a] for a in axes]))

    def backward(g):
        if x.requires_grad:
            accumulate_grad(x, _spread(g, x.shape, axes) / count)

    return make_node(out, (x,), backward, "mean")


def _spread(g: np.ndarray, shape: tuple, axes) -> np.ndarray:
    """Broadcast a reduced gradient back to the pre-reduction shape."""
    if axes is None:
        return np.broadcast_to(g, shape).copy()
    expanded = list(shape)
    for a in axes:
        expanded[a] = 1
    return np.broadcast_to(g.reshape(expanded), shape).copy()


def max(x: Tensor, axis=None) -> Tensor:  # noqa: A001 - mirrors the primitive name
    if x.size == 0:
        raise ShapeError("max of an empty tensor")
    if axis is not None:
        axis = _norm_axis(axis, x.data.ndim, "max")
    xd = x.data
    if axis is None:
        out = xd.max()
        flat_arg = int(xd.argmax())

        def backward(g):
            if x.requires_grad:
                d = np.zeros_like(xd)
                d.reshape(-1)[flat_arg] = g
                accumulate_grad(x, d)

    else:
        out = xd.max(axis=axis)
        arg = np.expand_dims(xd.argmax(axis=axis), axis)

        def backward(g):
            if x.requires_grad:
                d = np.zeros_like(xd)
                np.put_along_axis(d, arg, np.expand_dims(g, axis), axis)
                accumulate_grad(x, d)

    return make_node(np.asarray(out, dtype=x.dtype), (x,), backward, "max")


# -- shape manipulation -------------------------------------------------------


def reshape(x: Tensor, shape) -> Tensor:
    shape = tuple(int(s) for s in shape)
    try:
        out = x.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"cannot reshape {x.shape} ({x.size} elements) to {shape}") from None

    def backward(g):
        if x.requires_grad:
            accumulate_grad(x, g.reshape(x.shape))

    return make_node(out, (x,), backward, "reshape")


def transpose(x: Tensor, axes) -> Tensor:
    axes = tuple(int(a) for a in axes)
    if sorted(axes) != list(range(x.data.ndim)):
        raise ShapeError(f"transpose: {axes} is not a permutation of {x.data.ndim} axes")
    inv = np.argsort(axes)
    out = x.data.transpose(axes)

    def backward(g):
        if x.requires_grad:
            accumulate_grad(x, g.transpose(inv))

    return make_node(out, (x,), backward, "transpose")


def window_partition(x: Tensor, window: int) -> Tensor:
    """Split (N,H,W,C) into non-overlapping windows (N*nh*nw, window, window, C)."""
    if x.data.ndim != 4:
        raise ShapeError(f"window_partition expects NHWC, got {x.shape}")
    n, h, w, c = x.shape
    if window < 1 or h % window or w % window:
        raise ShapeError(f"window {window} must divide spatial extents {h}x{w}")
    nh, nw = h // window, w // window
    out = (
        x.data.reshape(n, nh, window, nw, window, c)
        .transpose(0, 1, 3, 2, 4, 5)
        .reshape(n * nh * nw, window, window, c)
    )

    def backward(g):
        if x.requires_grad:
            gg = (
                g.reshape(n, nh, nw, window, window, c)
                .transpose(0, 1, 3, 2, 4, 5)
                .reshape(n, h, w, c)
            )
            accumulate_grad(x, gg)

    return make_node(np.ascontiguousarray(out), (x,), backward, "window_partition")


def window_merge(x: Tensor, window: int, grid: tuple) -> Tensor:
    """Inverse of :func:`window_partition`; ``grid`` is (nh, nw)."""
    if x.data.ndim != 4:
        raise ShapeError(f"window_merge expects windowed NHWC, got {x.shape}")
    nh, nw = grid
    b, wh, ww, c = x.shape
    if wh != window or ww != window:
        raise ShapeError(f"window_merge: windows are {wh}x{ww}, expected {window}x{window}")
    if b % (nh * nw):
        raise ShapeError(f"window_merge: {b} windows do not tile a {nh}x{nw} grid")
    n = b // (nh * nw)
    out = (
        x.data.reshape(n, nh, nw, window, window, c)
        .transpose(0, 1, 3, 2, 4, 5)
        .reshape(n, nh * window, nw * window, c)
    )

    def backward(g):
        if x.requires_grad:
            gg = (
                g.reshape(n, nh, window, nw, window, c)
                .transpose(0, 1, 3, 2, 4, 5)
                .reshape(b, window, window, c)
            )
            accumulate_grad(x, gg)

    return make_node(np.ascontiguousarray(out), (x,), backward, "window_merge")


# -- primitive registry -------------------------------------------------------

PRIMITIVES = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "scalar_mul": scalar_mul,
    "matmul": matmul,
    "conv2d": conv2d,
    "depthwise_conv2d": depthwise_conv2d,
    "linear": linear,
    "relu": relu,
    "gelu": gelu,
    "sigmoid": sigmoid,
    "softmax": softmax,
    "log": log,
    "exp": exp,
    "layer_norm": layer_norm,
    "batch_stat_norm": batch_stat_norm,
    "mean": mean,
    "sum": sum,
    "max": max,
    "reshape": reshape,
    "transpose": transpose,
    "window_partition": window_partition,
    "window_merge": window_merge,
    "huber_elementwise": huber_elementwise,
}


def primitive_forward(kind: str, inputs, attrs: dict | None = None) -> Tensor:
    """Dispatch a primitive by name; the uniform entry point used by tests."""
    try:
        fn = PRIMITIVES[kind]
    except KeyError:
        raise ValueError(f"unknown primitive kind: {kind!r}") from None
    return fn(*inputs, **(attrs or {}))
