"""Pure-numpy sequence scans.

These walk a single sequence one step at a time through the ordinary cell
step functions. They are the portable fallback for the compiled scans and
the ground truth the compiled ones are tested against.
"""

from __future__ import annotations

import numpy as np

from ..arn import ArnParams, arn_step
from ..gru import GruParams, gru_step


def arn_scan(params: ArnParams, xs: np.ndarray, h0: np.ndarray | None = None) -> np.ndarray:
    """Run the attention cell over xs [T x m]; returns all states [T x n]."""
    xs = np.asarray(xs, dtype=np.float64)
    T = xs.shape[0]
    n = params.n
    h = np.zeros(n) if h0 is None else np.asarray(h0, dtype=np.float64)
    out = np.empty((T, n))
    for t in range(T):
        h = arn_step(params, h, xs[t]).h_t
        out[t] = h
    return out


def gru_scan(params: GruParams, xs: np.ndarray, h0: np.ndarray | None = None) -> np.ndarray:
    """Run the gated cell over xs [T x m]; returns all states [T x n]."""
    xs = np.asarray(xs, dtype=np.float64)
    T = xs.shape[0]
    n = params.n
    h = np.zeros(n) if h0 is None else np.asarray(h0, dtype=np.float64)
    out = np.empty((T, n))
    for t in range(T):
        h = gru_step(params, h, xs[t]).h_t
        out[t] = h
    return out
