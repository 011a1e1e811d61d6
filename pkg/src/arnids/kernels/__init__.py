"""Sequence-scan backends.

Two implementations of the same forward-only scans: a compiled extension
built at install time and a numpy fallback. Import picks the compiled one
when present; everything degrades to the fallback automatically when the
package was installed without a C compiler.
"""

from __future__ import annotations

import numpy as np

from ..arn import ArnParams
from ..errors import UsageError
from ..gru import GruParams
from . import reference

try:
    from . import _fast
except ImportError:
    _fast = None

DEFAULT_BACKEND = "fast" if _fast is not None else "reference"


def available_backends() -> tuple:
    return ("fast", "reference") if _fast is not None else ("reference",)


def _pick(backend: str) -> str:
    if backend == "auto":
        return DEFAULT_BACKEND
    if backend not in ("fast", "reference"):
        raise UsageError(f"unknown backend {backend!r}; expected auto, fast or reference")
    if backend == "fast" and _fast is None:
        raise UsageError("compiled backend is not available in this install")
    return backend


def arn_scan(params: ArnParams, xs: np.ndarray, h0: np.ndarray | None = None, backend: str = "auto") -> np.ndarray:
    """Forward the attention cell over one sequence; states after each step."""
    choice = _pick(backend)
    if choice == "reference":
        return reference.arn_scan(params, xs, h0)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    start = np.zeros(params.n) if h0 is None else np.ascontiguousarray(h0, dtype=np.float64)
    return _fast.arn_scan(
        np.ascontiguousarray(params.Wx),
        np.ascontiguousarray(params.Wh),
        np.ascontiguousarray(params.satt.Wq),
        np.ascontiguousarray(params.satt.Wk),
        np.ascontiguousarray(params.satt.Wv),
        xs,
        start,
    )


def gru_scan(params: GruParams, xs: np.ndarray, h0: np.ndarray | None = None, backend: str = "auto") -> np.ndarray:
    """Forward the gated cell over one sequence; states after each step."""
    choice = _pick(backend)
    if choice == "reference":
        return reference.gru_scan(params, xs, h0)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    start = np.zeros(params.n) if h0 is None else np.ascontiguousarray(h0, dtype=np.float64)
    return _fast.gru_scan(
        np.ascontiguousarray(params.W_R),
        np.ascontiguousarray(params.W_Z),
        np.ascontiguousarray(params.W_h),
        xs,
        start,
    )
