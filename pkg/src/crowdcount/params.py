"""Walking nested parameter dataclasses in declaration order.

Parameter containers are plain dataclasses holding Tensors, other
dataclasses, or lists of them.  Declaration order of fields (and list
indices) defines the canonical ordering used by the optimizer, the
checkpoint payload, and the parameter counter.
"""

from __future__ import annotations

import dataclasses
from typing import Iterator

from .tensor import Tensor


def named_params(obj, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
    if obj is None:
        return
    if isinstance(obj, Tensor):
        yield prefix, obj
        return
    if dataclasses.is_dataclass(obj):
        for f in dataclasses.fields(obj):
            name = f"{prefix}.{f.name}" if prefix else f.name
            yield from named_params(getattr(obj, f.name), name)
        return
    if isinstance(obj, (list, tuple)):
        for i, item in enumerate(obj):
            yield from named_params(item, f"{prefix}[{i}]")
        return
    # non-parameter leaves (ints, floats, strings) are configuration, not params


def param_list(obj) -> list[Tensor]:
    return [t for _, t in named_params(obj)]


def zero_grads(obj) -> None:
    for _, t in named_params(obj):
        t.zero_grad()
