"""One-way attention over exactly two items: the previous hidden state and
the current input.

Only the previous hidden state issues a query. That query is scored against
the keys of both items, the two scaled scores are softmax-normalized, and the
output is the resulting convex combination of the two value vectors. The
output therefore blends what the past state already carries with what the
current input contributes, weighted by their measured similarity.

All functions accept either single vectors of length n or batches shaped
(B, n); scores and weights are scalars in the first case and length-B arrays
in the second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .numeric import softmax


@dataclass
class SattParams:
    """Weights of the attention block. All three matrices are d x n with d == n.

    d is the query/key/value dimension. It is pinned to n so the attention
    output can be added back onto the projected input without reshaping.
    """

    Wq: np.ndarray
    Wk: np.ndarray
    Wv: np.ndarray

    @property
    def d(self) -> int:
        return self.Wq.shape[0]

    def validate(self) -> None:
        if not (self.Wq.shape == self.Wk.shape == self.Wv.shape):
            raise ShapeError(
                f"attention weights must share one shape, got "
                f"{self.Wq.shape}/{self.Wk.shape}/{self.Wv.shape}"
            )
        if self.Wq.ndim != 2 or self.Wq.shape[0] != self.Wq.shape[1]:
            raise ShapeError(f"attention weights must be square (d == n), got {self.Wq.shape}")


@dataclass
class SattTrace:
    """Every intermediate of one attention evaluation, kept for backprop.

    q2 is projected alongside the others but never scored: the single query
    belongs to the past hidden state, which is what makes the attention
    one-way.
    """

    h_in: np.ndarray
    x_in: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    score_h: np.ndarray
    score_x: np.ndarray
    w_h: np.ndarray
    w_x: np.ndarray
    out: np.ndarray


def init_satt_params(n: int) -> SattParams:
    """Identity start for all three square maps.

    With queries, keys and values passing their inputs through unchanged,
    the state scores positively against itself from the first step and the
    value path neither shrinks nor rotates what the state carries. Small
    random matrices here instead make each step contract the state, which
    erases early-window information before any gradient can use it; with
    identities the recurrence starts norm-preserving and training then
    reshapes the maps freely.
    """
    return SattParams(Wq=np.eye(n), Wk=np.eye(n), Wv=np.eye(n))


def _check_inputs(p: SattParams, h_prev: np.ndarray, x_t: np.ndarray) -> None:
    n = p.Wq.shape[1]
    if h_prev.shape != x_t.shape:
        raise ShapeError(f"attention inputs must share a shape, got {h_prev.shape} and {x_t.shape}")
    if h_prev.ndim not in (1, 2) or h_prev.shape[-1] != n:
        raise ShapeError(f"attention inputs must have {n} features, got shape {h_prev.shape}")


def satt_forward(p: SattParams, h_prev: np.ndarray, x_t: np.ndarray) -> SattTrace:
    """Project both items, score them against the past state's query, fuse.

    Steps: q/k/v projections of both inputs through the shared Wq/Wk/Wv;
    scores = (q1.k1)/sqrt(d) and (q1.k2)/sqrt(d); softmax over the two
    scores; output = w_h * v1 + w_x * v2.
    """
    p.validate()
    h_prev = np.asarray(h_prev, dtype=np.float64)
    x_t = np.asarray(x_t, dtype=np.float64)
    _check_inputs(p, h_prev, x_t)

    q1 = h_prev @ p.Wq.T
    q2 = x_t @ p.Wq.T
    k1 = h_prev @ p.Wk.T
    k2 = x_t @ p.Wk.T
    v1 = h_prev @ p.Wv.T
    v2 = x_t @ p.Wv.T

    scale = math.sqrt(p.d)
    score_h = np.sum(q1 * k1, axis=-1) / scale
    score_x = np.sum(q1 * k2, axis=-1) / scale

    weights = softmax(np.stack([score_h, score_x], axis=-1))
    w_h = weights[..., 0]
    w_x = weights[..., 1]
    out = w_h[..., None] * v1 + w_x[..., None] * v2
    return SattTrace(
        h_in=h_prev, x_in=x_t,
        q1=q1, q2=q2, k1=k1, k2=k2, v1=v1, v2=v2,
        score_h=score_h, score_x=score_x, w_h=w_h, w_x=w_x, out=out,
    )


def _outer_sum(rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Sum of outer products over the batch axis (plain outer for vectors)."""
    r = np.atleast_2d(rows)
    c = np.atleast_2d(cols)
    return r.T @ c


def satt_backward(
    p: SattParams, trace: SattTrace, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Analytic gradients of the attention output.

    Returns (dWq, dWk, dWv, d_h_prev, d_x_t), chain-ruled with grad_out.
    Weight gradients are summed over the batch axis when inputs were batched.
    """
    g = np.asarray(grad_out, dtype=np.float64)
    if g.shape != trace.out.shape:
        raise ShapeError(f"grad_out shape {g.shape} does not match output shape {trace.out.shape}")

    d_v1 = trace.w_h[..., None] * g
    d_v2 = trace.w_x[..., None] * g
    d_wh = np.sum(g * trace.v1, axis=-1)
    d_wx = np.sum(g * trace.v2, axis=-1)

    # Jacobian of the two-way softmax.
    mix = trace.w_h * d_wh + trace.w_x * d_wx
    d_score_h = trace.w_h * (d_wh - mix)
    d_score_x = trace.w_x * (d_wx - mix)

    scale = math.sqrt(p.d)
    d_q1 = (d_score_h[..., None] * trace.k1 + d_score_x[..., None] * trace.k2) / scale
    d_k1 = d_score_h[..., None] * trace.q1 / scale
    d_k2 = d_score_x[..., None] * trace.q1 / scale

    dWq = _outer_sum(d_q1, trace.h_in)
    dWk = _outer_sum(d_k1, trace.h_in) + _outer_sum(d_k2, trace.x_in)
    dWv = _outer_sum(d_v1, trace.h_in) + _outer_sum(d_v2, trace.x_in)

    d_h_prev = d_q1 @ p.Wq + d_k1 @ p.Wk + d_v1 @ p.Wv
    d_x_t = d_k2 @ p.Wk + d_v2 @ p.Wv
    return dWq, dWk, dWv, d_h_prev, d_x_t
