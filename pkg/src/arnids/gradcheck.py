"""Finite-difference oracle for gradient verification.

Analytic backward passes everywhere in the package are checked against
central differences of the corresponding scalar loss. The comparison uses

    rel_err = |analytic - numeric| / max(|analytic|, |numeric|, floor)

with floor = 1e-3: the floor keeps the ratio meaningful where both values
are essentially zero and finite-difference noise (about 1e-11 at h = 1e-5 in
float64) would otherwise dominate. A genuinely wrong gradient of any
practical magnitude still fails loudly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

DEFAULT_STEP = 1e-5
DEFAULT_FLOOR = 1e-3


def central_difference(
    f: Callable[[], float], param: np.ndarray, h: float = DEFAULT_STEP
) -> np.ndarray:
    """Numeric gradient of scalar f with respect to every element of param.

    param is perturbed in place and restored; f must read the live array.
    """
    grad = np.empty_like(param)
    flat = param.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        f_plus = f()
        flat[i] = orig - h
        f_minus = f()
        flat[i] = orig
        gflat[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


def max_relative_error(
    analytic: np.ndarray, numeric: np.ndarray, floor: float = DEFAULT_FLOOR
) -> float:
    a = np.asarray(analytic, dtype=np.float64)
    b = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0


@dataclass
class GroupResult:
    name: str
    max_rel_err: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_err <= self.tolerance


def check_gradients(
    loss: Callable[[], float],
    params: Mapping[str, np.ndarray],
    analytic: Mapping[str, np.ndarray],
    tolerance: float,
    h: float = DEFAULT_STEP,
    floor: float = DEFAULT_FLOOR,
) -> list[GroupResult]:
    """Compare analytic gradients of every named parameter against central differences."""
    results = []
    for name in params:
        numeric = central_difference(loss, params[name], h=h)
        err = max_relative_error(analytic[name], numeric, floor=floor)
        results.append(GroupResult(name=name, max_rel_err=err, tolerance=tolerance))
    return results
