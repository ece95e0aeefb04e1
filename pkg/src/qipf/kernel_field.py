"""Gaussian-RKHS potential field over pooled model weights.

The field at an evaluation point y is the empirical kernel mean

    psi0(y) = (1/n) * sum_t exp(-(y - w_t)^2 / (2 sigma^2))

together with its first two analytic derivatives in y.  The kernel is
normalized to unit peak (no density prefactor): downstream mode ratios
divide curvature by value, so any constant prefactor cancels, and unit
peak keeps psi0 in (0, 1].

All per-point sums use error-free (Shewchuk) summation so results are
bitwise independent of the order of the weight samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, InvalidArgumentError

__all__ = [
    "WeightField",
    "FieldEval",
    "gaussian_kernel",
    "evaluate_field",
    "silverman_bandwidth",
    "effective_sigma",
]


@dataclass(frozen=True)
class WeightField:
    """Immutable set of weight samples with a kernel width.

    Safe to share across threads; evaluation is a pure function of
    (points, sigma, y).
    """

    points: np.ndarray
    sigma: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).ravel()
        if pts.size < 1:
            raise InvalidArgumentError("weight field needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgumentError("weight field points must be finite")
        sigma = float(self.sigma)
        if not math.isfinite(sigma) or sigma <= 0.0:
            raise InvalidArgumentError(f"sigma must be finite and > 0, got {sigma}")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "sigma", sigma)

    @property
    def count(self) -> int:
        return int(self.points.size)


@dataclass(frozen=True)
class FieldEval:
    """Field value and first two y-derivatives at one evaluation point.

    value lies in (0, 1] up to floating underflow at extreme distances.
    """

    value: float
    d1: float
    d2: float


def gaussian_kernel(w: float, y: float, sigma: float) -> float:
    """Unit-peak Gaussian kernel exp(-(y-w)^2 / (2 sigma^2))."""
    if not (math.isfinite(w) and math.isfinite(y)):
        raise InvalidArgumentError("kernel inputs must be finite")
    if not (math.isfinite(sigma) and sigma > 0.0):
        raise InvalidArgumentError(f"sigma must be finite and > 0, got {sigma}")
    d = (y - w) / sigma
    return math.exp(-0.5 * d * d)


def _fsum(values: np.ndarray) -> float:
    # math.fsum is an exact (error-free transformation) sum, so the result
    # is the correctly rounded float regardless of term order.
    return math.fsum(values.tolist())


def evaluate_field(field: WeightField, y: float) -> FieldEval:
    """Evaluate psi0 and its first/second derivatives at scalar y.

    d1 = (1/n) sum G * (w - y) / sigma^2
    d2 = (1/n) sum G * ((y - w)^2 / sigma^4 - 1 / sigma^2)
    """
    if not math.isfinite(y):
        raise InvalidArgumentError(f"evaluation point must be finite, got {y}")
    w = field.points
    s2 = field.sigma * field.sigma
    diff = w - y
    g = np.exp(diff * diff / (-2.0 * s2))
    n = w.size
    value = _fsum(g) / n
    d1 = _fsum(g * diff / s2) / n
    d2 = _fsum(g * (diff * diff / (s2 * s2) - 1.0 / s2)) / n
    return FieldEval(value=value, d1=d1, d2=d2)


def _interp_quantile(sorted_x: np.ndarray, q: float) -> float:
    # Linear interpolation between order statistics at rank (n-1)*q.
    pos = (sorted_x.size - 1) * q
    lo = int(math.floor(pos))
    hi = min(lo + 1, sorted_x.size - 1)
    frac = pos - lo
    return float(sorted_x[lo] * (1.0 - frac) + sorted_x[hi] * frac)


def silverman_bandwidth(samples, rule: str = "iqr-min") -> float:
    """Rule-of-thumb kernel bandwidth for a 1-D sample.

    rule="iqr-min" (default): 0.9 * min(s, IQR/1.34) * n^(-1/5) with s the
    sample standard deviation and IQR from linearly interpolated quantiles.
    If the IQR is zero but the sample still has spread, s alone is used so
    the result stays positive.  rule="gaussian": 1.06 * s * n^(-1/5).
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 2:
        raise InvalidArgumentError("bandwidth needs at least 2 samples")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("bandwidth samples must be finite")
    s = float(np.std(x, ddof=1))
    if rule == "gaussian":
        scale = 1.06 * s
    elif rule == "iqr-min":
        xs = np.sort(x)
        iqr = _interp_quantile(xs, 0.75) - _interp_quantile(xs, 0.25)
        spread = min(s, iqr / 1.34) if iqr > 0.0 else s
        scale = 0.9 * spread
    else:
        raise InvalidArgumentError(f"unknown bandwidth rule {rule!r}")
    if scale <= 0.0:
        raise DegenerateDataError("all samples identical; bandwidth would be 0")
    return scale * x.size ** (-0.2)


def effective_sigma(samples, factor: float, rule: str = "iqr-min") -> float:
    """Silverman bandwidth scaled by a cross-validated width factor."""
    if not (math.isfinite(factor) and factor > 0.0):
        raise InvalidArgumentError(f"factor must be finite and > 0, got {factor}")
    return factor * silverman_bandwidth(samples, rule=rule)
