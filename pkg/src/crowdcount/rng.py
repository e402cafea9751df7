"""Seeded random number generation and parameter initialization.

All randomness in the package flows through ``numpy.random.Generator``
objects created here, so identical seeds give bitwise-identical streams.
"""

from __future__ import annotations

import numpy as np

from .tensor import DEFAULT_DTYPE, Tensor


def seeded_rng(seed: int) -> np.random.Generator:
    """PCG64 generator with a fixed seed."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def child_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream derived from (seed, keys); order-free and stable."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))


def truncated_normal(rng: np.random.Generator, shape, std: float = 0.02, clip: float = 2.0) -> np.ndarray:
    """Normal(0, std) draws, redrawn until within ``clip`` standard deviations."""
    n = int(np.prod(shape)) if shape else 1
    out = rng.standard_normal(n)
    bad = np.abs(out) > clip
    while bad.any():
        out[bad] = rng.standard_normal(int(bad.sum()))
        bad = np.abs(out) > clip
    return (std * out).reshape(shape)


def weight_param(rng: np.random.Generator, shape, dtype=DEFAULT_DTYPE, std: float = 0.02) -> Tensor:
    return Tensor(truncated_normal(rng, shape, std=std).astype(dtype), requires_grad=True)


def zeros_param(shape, dtype=DEFAULT_DTYPE) -> Tensor:
    return Tensor(np.zeros(shape, dtype=dtype), requires_grad=True)


def ones_param(shape, dtype=DEFAULT_DTYPE) -> Tensor:
    return Tensor(np.ones(shape, dtype=dtype), requires_grad=True)
