"""Dense tensor type with reverse-mode automatic differentiation.

A :class:`Tensor` wraps a float32 or float64 numpy array.  Operations on
tensors (see :mod:`crowdcount.ops`) record their inputs and a backward
closure on the output node, which makes the computation graph implicit in
the tensors themselves.  Calling :func:`backward` on a scalar result walks
that graph once in reverse topological order and accumulates gradients
into every reachable leaf that has ``requires_grad`` set.

Conventions, stated once:

* row-major (C-order) data, images in NHWC layout;
* float32 is the working precision, float64 exists for gradient checks;
* broadcasting is restricted to scalar-with-tensor and bias-style adds
  (the broadcast result must have the shape of one of the operands);
* a graph is consumed by its backward pass and confined to one thread.
"""

from __future__ import annotations

import contextlib
import threading

import numpy as np

DEFAULT_DTYPE = np.float32

SUPPORTED_DTYPES = (np.float32, np.float64)


class ShapeError(ValueError):
    """Operand shapes are invalid for the requested primitive."""


class GraphError(RuntimeError):
    """Misuse of the autodiff graph (non-scalar loss, reused graph, ...)."""


_state = threading.local()


def grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


@contextlib.contextmanager
def no_grad():
    """Disable graph recording inside the context (pure inference)."""
    prev = grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = prev


class Tensor:
    """n-dimensional array node of the differentiation graph.

    Leaf tensors created with ``requires_grad=True`` carry a zero gradient
    buffer from birth, so parameters that are unreachable from a loss end
    up with an exact zero gradient rather than a missing one.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn", "_op", "_consumed")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype.type not in SUPPORTED_DTYPES:
            arr = arr.astype(DEFAULT_DTYPE)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad = np.zeros_like(arr) if requires_grad else None
        self._parents: tuple = ()
        self._backward_fn = None
        self._op: str | None = None
        self._consumed = False

    # -- basic introspection -------------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self) -> str:
        op = f", op={self._op}" if self._op else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype.name}{op})"

    def is_leaf(self) -> bool:
        return not self._parents

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad[...] = 0.0

    # -- operator sugar (delegates to crowdcount.ops) -------------------------

    def __add__(self, other):
        from . import ops

        if isinstance(other, Tensor):
            return ops.add(self, other)
        return ops.scalar_add(self, float(other))

    def __sub__(self, other):
        from . import ops

        if isinstance(other, Tensor):
            return ops.sub(self, other)
        return ops.scalar_add(self, -float(other))

    def __mul__(self, other):
        from . import ops

        if isinstance(other, Tensor):
            return ops.mul(self, other)
        return ops.scalar_mul(self, float(other))

    __rmul__ = __mul__

    def __neg__(self):
        from . import ops

        return ops.scalar_mul(self, -1.0)

    def __matmul__(self, other):
        from . import ops

        return ops.matmul(self, other)

    def reshape(self, *shape):
        from . import ops

        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, axes):
        from . import ops

        return ops.transpose(self, axes)

    def backward(self) -> None:
        backward(self)


def make_node(data: np.ndarray, parents, backward_fn, op: str) -> Tensor:
    """Wrap a freshly computed array as a graph node.

    Records parents and the backward closure only while gradients are
    enabled and at least one parent requires them.
    """
    out = Tensor(data)
    needs = grad_enabled() and any(p.requires_grad for p in parents)
    if needs:
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward_fn = backward_fn
        out._op = op
    return out


def accumulate_grad(t: Tensor, g: np.ndarray) -> None:
    """Add a gradient contribution to ``t``."""
    if t.grad is None:
        # Own the buffer: views alias the child's gradient and must be copied.
        t.grad = g if g.base is None else g.copy()
    else:
        t.grad += g


def backward(loss: Tensor) -> None:
    """Reverse-mode sweep from a scalar ``loss``.

    Visits every recorded primitive exactly once, in reverse topological
    order, then releases the graph.  Gradients accumulate into ``.grad``
    of every ``requires_grad`` tensor reachable from the loss; leaves that
    are not reachable keep their existing (zero) gradient.
    """
    if loss.size != 1:
        raise GraphError(f"backward needs a scalar loss, got shape {loss.shape}")
    if loss._consumed:
        raise GraphError("graph already consumed by a previous backward pass")
    if not loss.requires_grad:
        raise GraphError("loss does not require grad; nothing to differentiate")

    topo: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen and p.requires_grad:
                stack.append((p, False))

    loss._consumed = True
    accumulate_grad(loss, np.ones_like(loss.data))
    for node in reversed(topo):
        fn = node._backward_fn
        if fn is not None:
            fn(node.grad)
        if not node.is_leaf():
            # Release saved activations; interior grads are not reused.
            node._parents = ()
            node._backward_fn = None
            node._consumed = True
            node.grad = None
    loss._consumed = True
