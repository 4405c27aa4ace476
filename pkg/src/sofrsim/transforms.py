"""Bijective maps between curve coefficients / macro variables and the
stationary factor vectors used by the time-series models.

Curve side: factor 1 is the log distance of the short-end coefficient to the
policy floor, factors 2..K are log term spreads between shifted adjacent
coefficients.  Macro side: the policy floor enters through log(floor + shift),
inflation and GDP growth pass through unchanged (percentage points).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FactorDomainError, InsufficientDataError

#: default coefficient shifts (decimal); chosen so historical shifted series
#: stay positive and roughly symmetric
DEFAULT_CURVE_SHIFTS = (
    0.0081,
    0.00965,
    0.00954,
    0.009,
    0.0067,
    0.0044,
    0.0015,
    0.00042,
    -0.0002,
)

#: default shift for the policy floor (decimal)
DEFAULT_FLOOR_SHIFT = 0.005


@dataclass(frozen=True)
class ShiftConfig:
    """Positive-domain shifts for the log transforms."""

    curve_shifts: tuple[float, ...] = DEFAULT_CURVE_SHIFTS
    floor_shift: float = DEFAULT_FLOOR_SHIFT

    def __post_init__(self):
        arr = np.asarray(self.curve_shifts, dtype=float)
        if not np.all(np.isfinite(arr)) or not np.isfinite(self.floor_shift):
            raise ValueError("shifts must be finite")
        object.__setattr__(self, "curve_shifts", tuple(float(v) for v in arr))

    @property
    def size(self) -> int:
        return len(self.curve_shifts)

    def shifts_array(self) -> np.ndarray:
        return np.asarray(self.curve_shifts, dtype=float)


def to_factors(coeffs, floor: float, cfg: ShiftConfig) -> np.ndarray:
    """Map curve coefficients to the stationary factor vector.

    factor_1 = ln(coeff_1 + c_1 - floor); factor_k = ln(coeff_k + c_k)
    - ln(coeff_{k-1} + c_{k-1}) for k >= 2.  Raises FactorDomainError with the
    offending index when a log argument is non-positive.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    c = cfg.shifts_array()
    if coeffs.shape != c.shape:
        raise ValueError("coefficient vector does not match shift config")
    shifted = coeffs + c
    head = shifted[0] - floor
    if head <= 0.0:
        raise FactorDomainError(
            f"coeff_1 + shift - floor = {head:.6g} <= 0", index=0
        )
    if np.any(shifted[1:] <= 0.0):
        bad = int(np.argmax(shifted[1:] <= 0.0)) + 1
        raise FactorDomainError(
            f"coeff_{bad + 1} + shift = {shifted[bad]:.6g} <= 0", index=bad
        )
    logs = np.log(shifted)
    out = np.empty_like(coeffs)
    out[0] = np.log(head)
    out[1:] = logs[1:] - logs[:-1]
    return out


def from_factors(factors, floor: float, cfg: ShiftConfig) -> np.ndarray:
    """Exact inverse of :func:`to_factors`."""
    factors = np.asarray(factors, dtype=float)
    c = cfg.shifts_array()
    if factors.shape != c.shape:
        raise ValueError("factor vector does not match shift config")
    out = np.empty_like(factors)
    out[0] = np.exp(factors[0]) + floor - c[0]
    for k in range(1, factors.size):
        out[k] = np.exp(factors[k]) * (out[k - 1] + c[k - 1]) - c[k]
    return out


def to_macro_factors(floor: float, inflation: float, growth: float, floor_shift: float) -> np.ndarray:
    """[ln(floor + shift), inflation, growth]; floor decimal, I/G in points."""
    if floor + floor_shift <= 0.0:
        raise FactorDomainError(f"floor + shift = {floor + floor_shift:.6g} <= 0", index=0)
    return np.array([np.log(floor + floor_shift), inflation, growth])


def from_macro_factors(vec, floor_shift: float) -> tuple[float, float, float]:
    """Inverse of :func:`to_macro_factors`."""
    vec = np.asarray(vec, dtype=float)
    return float(np.exp(vec[0]) - floor_shift), float(vec[1]), float(vec[2])


def quarterly_to_monthly(series):
    """Linearly interpolate a dated series onto the calendar month-end grid.

    *series* is a sequence of (date, value) pairs with at least two points;
    values outside the observed range are held at the nearest endpoint.
    """
    from .dates import month_ends
    import datetime as dt

    pts = sorted(series, key=lambda p: p[0])
    if len(pts) < 2:
        raise InsufficientDataError("need at least two points to interpolate")
    dates = [p[0] for p in pts]
    values = np.asarray([p[1] for p in pts], dtype=float)
    origin = dates[0]
    xs = np.array([(d - origin).days for d in dates], dtype=float)
    first = dt.date.fromordinal(dates[0].toordinal() - 1)
    grid = month_ends(first, dates[-1])
    gx = np.array([(d - origin).days for d in grid], dtype=float)
    gy = np.interp(gx, xs, values)
    return list(zip(grid, gy.tolist()))
