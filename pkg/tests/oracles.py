"""Naive reference implementations used as independent test oracles.

Everything here is written as plain nested loops (or direct formula
transcription) and must stay independent of the implementations under
test.
"""

from __future__ import annotations

import numpy as np


def naive_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    m, k = a.shape
    k2, n = b.shape
    assert k == k2
    out = np.zeros((m, n), dtype=np.result_type(a, b))
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for t in range(k):
                acc += a[i, t] * b[t, j]
            out[i, j] = acc
    return out


def naive_conv2d(x, w, b=None, stride=1, padding=0, groups=1):
    """Nested-loop NHWC convolution; kernel (KH,KW,Cin/groups,Cout)."""
    n, h, wd, cin = x.shape
    kh, kw, cin_g, cout = w.shape
    cout_g = cout // groups
    oh = (h + 2 * padding - kh) // stride + 1
    ow = (wd + 2 * padding - kw) // stride + 1
    xp = np.pad(x, ((0, 0), (padding, padding), (padding, padding), (0, 0)))
    out = np.zeros((n, oh, ow, cout), dtype=x.dtype)
    for ni in range(n):
        for oi in range(oh):
            for oj in range(ow):
                for co in range(cout):
                    g = co // cout_g
                    acc = 0.0
                    for i in range(kh):
                        for j in range(kw):
                            for ci in range(cin_g):
                                acc += (
                                    xp[ni, oi * stride + i, oj * stride + j, g * cin_g + ci]
                                    * w[i, j, ci, co]
                                )
                    out[ni, oi, oj, co] = acc
                    if b is not None:
                        out[ni, oi, oj, co] += b[co]
    return out


def naive_depthwise_conv2d(x, w, b=None, stride=1, padding=0):
    """Nested-loop per-channel convolution; kernel (KH,KW,C)."""
    n, h, wd, c = x.shape
    kh, kw, _ = w.shape
    oh = (h + 2 * padding - kh) // stride + 1
    ow = (wd + 2 * padding - kw) // stride + 1
    xp = np.pad(x, ((0, 0), (padding, padding), (padding, padding), (0, 0)))
    out = np.zeros((n, oh, ow, c), dtype=x.dtype)
    for ni in range(n):
        for oi in range(oh):
            for oj in range(ow):
                for ci in range(c):
                    acc = 0.0
                    for i in range(kh):
                        for j in range(kw):
                            acc += xp[ni, oi * stride + i, oj * stride + j, ci] * w[i, j, ci]
                    out[ni, oi, oj, ci] = acc
                    if b is not None:
                        out[ni, oi, oj, ci] += b[ci]
    return out


def quantize_level_bruteforce(c: float, c_max: float, k: int) -> int:
    """Direct transcription of the uniform quantization rule with the top clamp."""
    raw = int(np.floor(k * min(c, c_max) / c_max))
    return min(raw, k - 1)
