"""Dense float64 tensor arithmetic used by every other module.

Values are plain C-contiguous ``numpy.ndarray`` objects of dtype float64 and
rank at most 2 (vectors and matrices); all public operations are pure
functions of their inputs. Randomness always flows through an explicitly
seeded generator; there is no global RNG state anywhere in the package.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic generator (PCG64) for the given 64-bit seed."""
    return np.random.Generator(np.random.PCG64(seed))


def as_tensor(values) -> np.ndarray:
    """Coerce to a C-contiguous float64 array of rank <= 2."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim > 2:
        raise ShapeError(f"rank {arr.ndim} tensor not supported (max rank 2): shape {arr.shape}")
    return arr


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product a @ b with explicit inner-dimension checking.

    Accepts matrices and vectors (a vector is treated as a single row or
    column in the usual numpy way).
    """
    a = as_tensor(a)
    b = as_tensor(b)
    inner_a = a.shape[-1]
    inner_b = b.shape[0] if b.ndim > 0 else None
    if a.ndim == 0 or b.ndim == 0 or inner_a != inner_b:
        raise ShapeError(f"matmul shapes do not align: {a.shape} x {b.shape}")
    return a @ b


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Elementwise logistic function, overflow-safe on both tails."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def tanh_act(x: np.ndarray) -> np.ndarray:
    """Elementwise hyperbolic tangent."""
    return np.tanh(np.asarray(x, dtype=np.float64))


def softmax(scores: np.ndarray) -> np.ndarray:
    """Normalized exponentials along the last axis, max-subtracted for stability."""
    s = np.asarray(scores, dtype=np.float64)
    if s.shape[-1] < 1:
        raise ShapeError(f"softmax needs at least one score, got shape {s.shape}")
    shifted = s - np.max(s, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def stack_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Stack two equal-length vectors into a 2 x n matrix (row 0 = a, row 1 = b)."""
    a = as_tensor(a)
    b = as_tensor(b)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise ShapeError(f"stack_rows needs two equal-length vectors, got {a.shape} and {b.shape}")
    return np.stack([a, b], axis=0)


def init_uniform(rng: np.random.Generator, shape, scale: float) -> np.ndarray:
    """I.i.d. uniform values in [-scale, +scale]; deterministic given the generator state."""
    if scale < 0:
        raise ValueError(f"scale must be >= 0, got {scale}")
    return rng.uniform(-scale, scale, size=shape).astype(np.float64, copy=False)
