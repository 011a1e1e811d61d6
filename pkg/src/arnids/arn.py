"""Attention-gated recurrent cell.

Each step projects the raw input and the previous hidden state into a common
n-dimensional space, lets the one-way attention block decide how much of each
to keep, and adds the blended result back onto the projected input:

    x_proj = Wx @ x_raw
    h_proj = Wh @ h_prev
    supplement = attention(h_proj, x_proj)
    h_t = supplement + x_proj

There is no gating and no squashing nonlinearity on h_t; the state update is
a bare addition, so windows are kept short and inputs normalized upstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attention import (
    SattParams,
    SattTrace,
    _outer_sum,
    init_satt_params,
    satt_backward,
    satt_forward,
)
from .errors import ShapeError
from .numeric import init_uniform


@dataclass
class ArnParams:
    """Wx maps raw inputs (m) to the hidden space (n); Wh maps state to state."""

    Wx: np.ndarray
    Wh: np.ndarray
    satt: SattParams

    @property
    def n(self) -> int:
        return self.Wx.shape[0]

    @property
    def m(self) -> int:
        return self.Wx.shape[1]

    def validate(self) -> None:
        if self.Wx.ndim != 2 or self.Wh.ndim != 2:
            raise ShapeError(f"projection weights must be matrices, got {self.Wx.shape}/{self.Wh.shape}")
        n = self.Wx.shape[0]
        if self.Wh.shape != (n, n):
            raise ShapeError(f"state projection must be {n}x{n}, got {self.Wh.shape}")
        self.satt.validate()
        if self.satt.d != n:
            raise ShapeError(f"attention dimension {self.satt.d} must equal hidden size {n}")


@dataclass
class ArnStepTrace:
    x_proj: np.ndarray
    h_proj: np.ndarray
    h_stack: np.ndarray
    satt_trace: SattTrace
    h_t: np.ndarray
    x_raw: np.ndarray
    h_prev: np.ndarray


def init_arn_params(rng: np.random.Generator, n: int, m: int) -> ArnParams:
    """Random input projection, identity state path.

    Only the rectangular input map draws random values. The square
    state-to-state map starts as the identity, like the attention maps: the
    state update has no squashing, so a contractive random start would decay
    whatever the state holds a little more every step and long-range
    dependencies would be unlearnable in practice.
    """
    return ArnParams(
        Wx=init_uniform(rng, (n, m), 1.0 / math.sqrt(m)),
        Wh=np.eye(n),
        satt=init_satt_params(n),
    )


def arn_step(p: ArnParams, h_prev: np.ndarray, x_raw: np.ndarray) -> ArnStepTrace:
    """One recurrence step. Accepts (n,)/(m,) vectors or (B, n)/(B, m) batches."""
    p.validate()
    h_prev = np.asarray(h_prev, dtype=np.float64)
    x_raw = np.asarray(x_raw, dtype=np.float64)
    if h_prev.shape[-1] != p.n or h_prev.ndim not in (1, 2):
        raise ShapeError(f"h_prev must have {p.n} features, got shape {h_prev.shape}")
    if x_raw.shape[-1] != p.m or x_raw.ndim != h_prev.ndim:
        raise ShapeError(f"x_raw must have {p.m} features, got shape {x_raw.shape}")

    x_proj = x_raw @ p.Wx.T
    h_proj = h_prev @ p.Wh.T
    # Materialized for trace inspection; the attention block reads the two
    # rows directly.
    h_stack = np.stack([h_proj, x_proj], axis=-2)
    satt_trace = satt_forward(p.satt, h_proj, x_proj)
    h_t = satt_trace.out + x_proj
    return ArnStepTrace(
        x_proj=x_proj, h_proj=h_proj, h_stack=h_stack,
        satt_trace=satt_trace, h_t=h_t, x_raw=x_raw, h_prev=h_prev,
    )


def arn_step_backward(
    p: ArnParams, trace: ArnStepTrace, grad_h_t: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of one step: (dWx, dWh, dWq, dWk, dWv, d_h_prev, d_x_raw).

    grad flows into x_proj along two paths (the direct state addition and
    the attention block) and the two contributions are summed.
    """
    g = np.asarray(grad_h_t, dtype=np.float64)
    if g.shape != trace.h_t.shape:
        raise ShapeError(f"grad_h_t shape {g.shape} does not match state shape {trace.h_t.shape}")

    dWq, dWk, dWv, d_h_proj, d_x_proj = satt_backward(p.satt, trace.satt_trace, g)
    d_x_proj = d_x_proj + g

    dWx = _outer_sum(d_x_proj, trace.x_raw)
    dWh = _outer_sum(d_h_proj, trace.h_prev)
    d_x_raw = d_x_proj @ p.Wx
    d_h_prev = d_h_proj @ p.Wh
    return dWx, dWh, dWq, dWk, dWv, d_h_prev, d_x_raw
