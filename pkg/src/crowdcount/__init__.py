"""Weakly-supervised crowd counting at desk scale.

Count-only supervision, a hierarchical conv-attention backbone, learned
density-weighted token pooling, dual regression/classification heads, and
the training, metrics, profiling and CLI machinery around them, all on a
small numpy reverse-mode autodiff core.
"""

from .tensor import GraphError, ShapeError, Tensor, backward, no_grad

__version__ = "0.1.0"

__all__ = ["Tensor", "backward", "no_grad", "ShapeError", "GraphError", "__version__"]
