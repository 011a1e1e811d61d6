"""Gated recurrent unit baseline.

    r = sigmoid([h_prev, x] @ W_R)
    z = sigmoid([h_prev, x] @ W_Z)
    h_cand = tanh([x, r * h_prev] @ W_h)
    h_t = z * h_cand + (1 - z) * h_prev

The gates read the concatenation [h_prev, x]; the candidate reads
[x, r * h_prev]. Both concatenation orders are kept exactly as stated; the
weights are stored so each matrix right-multiplies its (n + m)-dimensional
concatenation. No bias terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attention import _outer_sum
from .errors import ShapeError
from .numeric import init_uniform, sigmoid, tanh_act


@dataclass
class GruParams:
    """Each matrix is (n + m) x n.

    For W_R and W_Z the first n rows pair with h_prev and the last m with x;
    for W_h the first m rows pair with x and the last n with r * h_prev.
    """

    W_R: np.ndarray
    W_Z: np.ndarray
    W_h: np.ndarray
    n: int
    m: int

    def validate(self) -> None:
        want = (self.n + self.m, self.n)
        for name, w in (("W_R", self.W_R), ("W_Z", self.W_Z), ("W_h", self.W_h)):
            if w.shape != want:
                raise ShapeError(f"{name} must be {want}, got {w.shape}")


@dataclass
class GruStepTrace:
    r_t: np.ndarray
    z_t: np.ndarray
    h_cand: np.ndarray
    h_t: np.ndarray
    h_prev: np.ndarray
    x_raw: np.ndarray


def init_gru_params(rng: np.random.Generator, n: int, m: int) -> GruParams:
    scale = 1.0 / math.sqrt(n + m)
    return GruParams(
        W_R=init_uniform(rng, (n + m, n), scale),
        W_Z=init_uniform(rng, (n + m, n), scale),
        W_h=init_uniform(rng, (n + m, n), scale),
        n=n, m=m,
    )


def gru_step(p: GruParams, h_prev: np.ndarray, x_raw: np.ndarray) -> GruStepTrace:
    """One recurrence step. Accepts (n,)/(m,) vectors or (B, n)/(B, m) batches."""
    p.validate()
    h_prev = np.asarray(h_prev, dtype=np.float64)
    x_raw = np.asarray(x_raw, dtype=np.float64)
    if h_prev.shape[-1] != p.n or h_prev.ndim not in (1, 2):
        raise ShapeError(f"h_prev must have {p.n} features, got shape {h_prev.shape}")
    if x_raw.shape[-1] != p.m or x_raw.ndim != h_prev.ndim:
        raise ShapeError(f"x_raw must have {p.m} features, got shape {x_raw.shape}")

    hx = np.concatenate([h_prev, x_raw], axis=-1)
    r_t = sigmoid(hx @ p.W_R)
    z_t = sigmoid(hx @ p.W_Z)
    xc = np.concatenate([x_raw, r_t * h_prev], axis=-1)
    h_cand = tanh_act(xc @ p.W_h)
    h_t = z_t * h_cand + (1.0 - z_t) * h_prev
    return GruStepTrace(r_t=r_t, z_t=z_t, h_cand=h_cand, h_t=h_t, h_prev=h_prev, x_raw=x_raw)


def gru_step_backward(
    p: GruParams, trace: GruStepTrace, grad_h_t: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of one step: (dW_R, dW_Z, dW_h, d_h_prev, d_x_raw)."""
    g = np.asarray(grad_h_t, dtype=np.float64)
    if g.shape != trace.h_t.shape:
        raise ShapeError(f"grad_h_t shape {g.shape} does not match state shape {trace.h_t.shape}")
    r, z, h_cand, h_prev, x = trace.r_t, trace.z_t, trace.h_cand, trace.h_prev, trace.x_raw
    n, m = p.n, p.m

    d_z = g * (h_cand - h_prev)
    d_cand = g * z
    d_h_prev = g * (1.0 - z)

    d_u = d_cand * (1.0 - h_cand * h_cand)
    xc = np.concatenate([x, r * h_prev], axis=-1)
    dW_h = _outer_sum(xc, d_u)
    d_xc = d_u @ p.W_h.T
    d_x = d_xc[..., :m].copy()
    d_rh = d_xc[..., m:]
    d_r = d_rh * h_prev
    d_h_prev = d_h_prev + d_rh * r

    d_sr = d_r * r * (1.0 - r)
    d_sz = d_z * z * (1.0 - z)
    hx = np.concatenate([h_prev, x], axis=-1)
    dW_R = _outer_sum(hx, d_sr)
    dW_Z = _outer_sum(hx, d_sz)
    d_hx = d_sr @ p.W_R.T + d_sz @ p.W_Z.T
    d_h_prev = d_h_prev + d_hx[..., :n]
    d_x = d_x + d_hx[..., n:]
    return dW_R, dW_Z, dW_h, d_h_prev, d_x
