"""Hermite-mode decomposition of the weight potential field.

Mode k at an evaluation point y is a curvature-to-value ratio of the
field composed with the k-th orthonormal Hermite polynomial:

    mode 0:  r_0(y) = lam * psi0''(y) / psi0(y)
    mode k:  r_k(y) = lam * (h_k o psi0)''(y) / (h_k o psi0)(y),   k >= 1

with lam = sigma^2 / 2 and, by the chain rule,

    (h_k o psi0)'' = h_k''(psi0) * psi0'^2 + h_k'(psi0) * psi0''.

Each mode is shifted by a per-mode offset E_k = -min(r_k) over a
calibration set, so mode values are nonnegative there with minimum zero.
Composition with h_0 (a constant) has zero curvature, so mode 0 uses the
raw field ratio instead.

Unlike psi0, the composed field h_k(psi0) can cross zero; denominators
are clamped at a small epsilon with the sign preserved, and clamped
points are flagged for diagnostics.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NumericalFailureError, UnsupportedOrderError
from .kernel_field import WeightField, evaluate_field

__all__ = [
    "QipfConfig",
    "ModeDecomposition",
    "hermite_normalized",
    "decompose",
    "uncertainty_score",
]

_MAX_ORDER = 170  # 2^k k! overflows float64 normalization beyond this

_PI_QUARTER = math.pi ** -0.25


def _hermite_sequence(max_k: int, x: float) -> list[float]:
    """Orthonormal Hermite values h_0(x)..h_max_k(x).

    Uses the normalized three-term recurrence
    h_{k+1} = x*sqrt(2/(k+1))*h_k - sqrt(k/(k+1))*h_{k-1}, which avoids
    the overflow of the raw physicists' recurrence.
    """
    h = [_PI_QUARTER]
    if max_k >= 1:
        h.append(math.sqrt(2.0) * x * _PI_QUARTER)
    for k in range(1, max_k):
        h.append(x * math.sqrt(2.0 / (k + 1)) * h[k] - math.sqrt(k / (k + 1)) * h[k - 1])
    return h


def hermite_normalized(k: int, x: float) -> tuple[float, float, float]:
    """Orthonormal Hermite polynomial h_k(x) with first two derivatives.

    h_k = H_k / sqrt(2^k k! sqrt(pi)) in the physicists' convention.  The
    derivatives follow from H_k' = 2k H_{k-1}:

        h_k'  = sqrt(2k) h_{k-1}
        h_k'' = 2 sqrt(k(k-1)) h_{k-2}
    """
    if k < 0:
        raise InvalidArgumentError(f"order must be >= 0, got {k}")
    if k > _MAX_ORDER:
        raise UnsupportedOrderError(
            f"order {k} exceeds {_MAX_ORDER}; normalization overflows float64"
        )
    if not math.isfinite(x):
        raise InvalidArgumentError(f"argument must be finite, got {x}")
    h = _hermite_sequence(k, x)
    dh = math.sqrt(2.0 * k) * h[k - 1] if k >= 1 else 0.0
    d2h = 2.0 * math.sqrt(k * (k - 1.0)) * h[k - 2] if k >= 2 else 0.0
    return h[k], dh, d2h


@dataclass(frozen=True)
class QipfConfig:
    """Knobs for mode extraction and scoring.

    num_modes is the number of Hermite modes beyond mode 0; the score
    averages modes 1..K unless include_mode_zero_in_score is set.
    """

    num_modes: int = 4
    sigma_factor: float = 80.0
    include_mode_zero_in_score: bool = False
    denom_epsilon: float = 1e-12
    pool_target: int = 1024

    def __post_init__(self):
        if self.num_modes < 0:
            raise InvalidArgumentError(f"num_modes must be >= 0, got {self.num_modes}")
        if not (self.denom_epsilon > 0.0):
            raise InvalidArgumentError("denom_epsilon must be > 0")
        if self.pool_target < 1:
            raise InvalidArgumentError("pool_target must be >= 1")
        if not (self.sigma_factor > 0.0):
            raise InvalidArgumentError("sigma_factor must be > 0")


@dataclass(frozen=True)
class ModeDecomposition:
    """Per-point mode values V_k and the offsets E_k that zeroed their minima.

    mode_values has shape (K+1, len(eval_points)); row k holds
    V_k(y) = E_k + r_k(y).  clamped_flags marks points where the composed
    field magnitude fell below the denominator epsilon.
    """

    eval_points: np.ndarray
    mode_values: np.ndarray
    offsets: np.ndarray
    clamped_flags: np.ndarray


def default_threads() -> int:
    """Parallelism cap from QIPF_THREADS (default 1)."""
    raw = os.environ.get("QIPF_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _raw_modes_at(field_: WeightField, y: float, num_modes: int, eps: float):
    """Unshifted mode ratios r_0..r_K and clamp flags at one point."""
    fe = evaluate_field(field_, y)
    if fe.value <= 0.0:
        # exp underflow at extreme distance from every weight sample
        raise NumericalFailureError(
            f"field value underflowed to {fe.value} at y={y}", y=y, k=0
        )
    lam = 0.5 * field_.sigma * field_.sigma
    r = np.empty(num_modes + 1)
    clamped = np.zeros(num_modes + 1, dtype=bool)
    r[0] = lam * fe.d2 / fe.value
    if num_modes >= 1:
        h = _hermite_sequence(num_modes, fe.value)
        d1sq = fe.d1 * fe.d1
        for k in range(1, num_modes + 1):
            dh = math.sqrt(2.0 * k) * h[k - 1]
            d2h = 2.0 * math.sqrt(k * (k - 1.0)) * h[k - 2] if k >= 2 else 0.0
            num = d2h * d1sq + dh * fe.d2
            hk = h[k]
            if abs(hk) < eps:
                clamped[k] = True
                hk = eps if hk >= 0.0 else -eps
            r[k] = lam * num / hk
    bad = np.flatnonzero(~np.isfinite(r))
    if bad.size:
        raise NumericalFailureError(
            f"non-finite mode value at y={y} (mode {int(bad[0])})",
            y=y,
            k=int(bad[0]),
        )
    return r, clamped


def _raw_mode_matrix(field_, ys, num_modes, eps, threads):
    """Stack raw mode columns for a batch of eval points.

    Per-point results are independent, so any partitioning over threads
    yields bitwise-identical output.
    """
    if threads > 1 and len(ys) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cols = list(pool.map(lambda y: _raw_modes_at(field_, y, num_modes, eps), ys))
    else:
        cols = [_raw_modes_at(field_, y, num_modes, eps) for y in ys]
    raw = np.stack([c[0] for c in cols], axis=1)
    clamped = np.stack([c[1] for c in cols], axis=1)
    return raw, clamped


def decompose(
    field_: WeightField,
    eval_points,
    calibration_points=None,
    config: QipfConfig = QipfConfig(),
    threads: int | None = None,
) -> ModeDecomposition:
    """Extract modes 0..K of the field at each evaluation point.

    Offsets are the negated minima of the raw ratios over the calibration
    set (the eval batch itself when none is given), so every mode's
    minimum over that set is exactly zero.
    """
    eval_pts = np.asarray(eval_points, dtype=np.float64).ravel()
    if eval_pts.size == 0:
        raise InvalidArgumentError("eval_points must be nonempty")
    if not np.all(np.isfinite(eval_pts)):
        raise InvalidArgumentError("eval_points must be finite")
    if calibration_points is None:
        calib_pts = eval_pts
    else:
        calib_pts = np.asarray(calibration_points, dtype=np.float64).ravel()
        if calib_pts.size == 0:
            raise InvalidArgumentError("calibration_points must be nonempty")
        if not np.all(np.isfinite(calib_pts)):
            raise InvalidArgumentError("calibration_points must be finite")
    if threads is None:
        threads = default_threads()

    k = config.num_modes
    eps = config.denom_epsilon
    raw_eval, clamped = _raw_mode_matrix(field_, eval_pts, k, eps, threads)
    if calib_pts is eval_pts or np.array_equal(calib_pts, eval_pts):
        raw_calib = raw_eval
    else:
        raw_calib, _ = _raw_mode_matrix(field_, calib_pts, k, eps, threads)
    offsets = -np.min(raw_calib, axis=1)
    return ModeDecomposition(
        eval_points=eval_pts,
        mode_values=raw_eval + offsets[:, None],
        offsets=offsets,
        clamped_flags=clamped,
    )


def uncertainty_score(decomp: ModeDecomposition, config: QipfConfig = QipfConfig()) -> np.ndarray:
    """Per-point uncertainty: the mean of the mode values.

    Averages modes 1..K by default; mode 0 (the unperturbed term) joins
    only when include_mode_zero_in_score is set.
    """
    first = 0 if config.include_mode_zero_in_score else 1
    rows = decomp.mode_values[first:]
    if rows.shape[0] == 0:
        raise InvalidArgumentError(
            "no modes to average: num_modes is 0 and mode 0 is excluded"
        )
    return rows.mean(axis=0)
