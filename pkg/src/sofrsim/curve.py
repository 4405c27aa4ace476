"""Overnight forward curve: basis families, ZCB prices, SOFR averages.

The curve is an affine combination F(s) = sum_k coeff_k * phi_k(s) of basis
functions over integer day offsets.  Two families are supported: piecewise
constant (indicator cells) and continuous piecewise linear (hat functions with
nodal values equal to the coefficients).
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dates import DAY_FRACTION, prior_business_day
from .errors import MissingFixingError, OutOfRangeError


def compensated_cumsum(values: np.ndarray) -> np.ndarray:
    """Prefix sums with Neumaier compensation.

    Returns c with c[0] = 0 and c[i] = sum(values[:i]); needed because the
    curve identities are checked at 1e-12 over multi-thousand-term sums.
    """
    out = np.empty(values.size + 1)
    out[0] = 0.0
    s = 0.0
    comp = 0.0
    for i, v in enumerate(values):
        t = s + v
        if abs(s) >= abs(v):
            comp += (s - t) + v
        else:
            comp += (v - t) + s
        s = t
        out[i + 1] = s + comp
    return out


@dataclass(frozen=True)
class BasisFamily:
    """Basis functions over day offsets.

    kind='linear': hat functions, phi_k(T_k) = 1, linear between adjacent
    tenors, constant extrapolation outside [T_1, T_K].
    kind='constant': phi_k is the indicator of (T_{k-1}, T_k] with T_0 = 0;
    the last cell extends past T_K (constant extrapolation).
    """

    kind: str
    tenors: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ("linear", "constant"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        t = self.tenors
        if len(t) < 1:
            raise ValueError("at least one tenor required")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("tenors must be strictly increasing")
        if self.kind == "constant" and t[0] <= 0:
            raise ValueError("constant-basis cell edges must be positive")
        if self.kind == "linear" and t[0] < 0:
            raise ValueError("tenors must be nonnegative")

    @property
    def size(self) -> int:
        return len(self.tenors)

    def values(self, s) -> np.ndarray:
        """Basis function values at day offsets *s*, shape (len(s), K)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        k = self.size
        if self.kind == "linear":
            out = np.empty((s.size, k))
            grid = np.asarray(self.tenors, dtype=float)
            for j in range(k):
                unit = np.zeros(k)
                unit[j] = 1.0
                out[:, j] = np.interp(s, grid, unit)
            return out
        idx = np.searchsorted(np.asarray(self.tenors), s, side="left")
        idx = np.clip(idx, 0, k - 1)
        out = np.zeros((s.size, k))
        out[np.arange(s.size), idx] = 1.0
        return out

    def interpolate(self, s, coeffs: np.ndarray):
        """Curve values at offsets *s* for the given coefficients."""
        coeffs = np.asarray(coeffs, dtype=float)
        if self.kind == "linear":
            return np.interp(s, np.asarray(self.tenors, dtype=float), coeffs)
        idx = np.clip(np.searchsorted(np.asarray(self.tenors), s, side="left"), 0, self.size - 1)
        return coeffs[idx]

    def period_weights(self, start: int, end: int) -> np.ndarray:
        """Vector w with w_k = delta * sum of phi_k over integer days [start, end).

        Row of the calibration design matrix; also the sensitivity of a
        period's log growth to each coefficient.
        """
        if end <= start:
            raise ValueError("period end must exceed start")
        days = np.arange(start, end, dtype=float)
        vals = self.values(days)
        # fsum per column: rows are <= a few thousand and accuracy matters
        return np.array([math.fsum(vals[:, j]) for j in range(self.size)]) * DAY_FRACTION


@dataclass(frozen=True)
class ForwardCurve:
    """An overnight forward curve on [0, cutoff] in day offsets."""

    basis: BasisFamily
    coeffs: np.ndarray
    curve_date: dt.date | None = None
    cutoff: int | None = None
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (self.basis.size,):
            raise ValueError("coefficient vector must match basis size")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)
        cutoff = self.cutoff if self.cutoff is not None else int(self.basis.tenors[-1])
        object.__setattr__(self, "cutoff", cutoff)
        daily = self.basis.interpolate(np.arange(cutoff, dtype=float), coeffs)
        object.__setattr__(self, "_cum", compensated_cumsum(np.atleast_1d(daily) * DAY_FRACTION))

    def rate(self, s):
        """Forward rate F(s) for 0 <= s <= cutoff."""
        arr = np.asarray(s, dtype=float)
        if np.any(arr < 0) or np.any(arr > self.cutoff):
            raise OutOfRangeError(f"day offset outside [0, {self.cutoff}]")
        out = self.basis.interpolate(arr, self.coeffs)
        return float(out) if np.isscalar(s) else out

    def accrual(self, t0: int, t1: int) -> float:
        """Compensated sum of F(s) * delta over integer days [t0, t1)."""
        if t0 < 0 or t1 > self.cutoff or t0 > t1:
            raise OutOfRangeError(f"period ({t0}, {t1}) outside [0, {self.cutoff}]")
        return float(self._cum[t1] - self._cum[t0])

    def zcb_price(self, t: int) -> float:
        """Zero-coupon bond price for maturity t days ahead; equals 1 at t=0."""
        if t < 0 or t > self.cutoff:
            raise OutOfRangeError(f"maturity {t} outside [0, {self.cutoff}]")
        return math.exp(-self._cum[t])

    def implied_futures_rate(self, t0: int, t1: int) -> float:
        """Simply-compounded futures rate consistent with the curve."""
        if t0 >= t1:
            raise OutOfRangeError("need t0 < t1")
        growth = self.accrual(t0, t1)
        return math.expm1(growth) / ((t1 - t0) * DAY_FRACTION)

    def spot_sofr(self) -> float:
        """Overnight rate implied by the one-day forward at s=0."""
        f0 = float(self.basis.interpolate(0.0, self.coeffs))
        return math.expm1(f0 * DAY_FRACTION) / DAY_FRACTION


def coeff_from_spot_sofr(rate: float) -> float:
    """Inverse of spot_sofr: the s=0 forward consistent with an overnight rate."""
    return math.log1p(rate * DAY_FRACTION) / DAY_FRACTION


@dataclass(frozen=True)
class RatePath:
    """Dated overnight rate fixings, strictly increasing dates."""

    dates: tuple[dt.date, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        if len(self.dates) != len(self.rates):
            raise ValueError("dates and rates must have equal length")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")
        if not all(math.isfinite(r) for r in self.rates):
            raise ValueError("rates must be finite")

    def lookup(self) -> dict[dt.date, float]:
        return dict(zip(self.dates, self.rates))


def _daily_rates(path: RatePath, t0: dt.date, t1: dt.date, holidays) -> list[float]:
    table = path.lookup()
    holidays = frozenset(holidays or ())
    out = []
    cur = t0
    while cur < t1:
        if cur in table:
            out.append(table[cur])
        else:
            prev = prior_business_day(cur, holidays)
            if prev not in table:
                raise MissingFixingError(f"no fixing available for {cur} (looked back to {prev})")
            out.append(table[prev])
        cur = dt.date.fromordinal(cur.toordinal() + 1)
    return out


def geometric_average(path: RatePath, t0: dt.date, t1: dt.date, holidays=()) -> float:
    """Compounded average rate over [t0, t1); weekend/holiday gaps reuse the
    prior business day's fixing."""
    if t0 >= t1:
        raise ValueError("need t0 < t1")
    rates = _daily_rates(path, t0, t1, holidays)
    prod = 1.0
    for r in rates:
        prod *= 1.0 + r * DAY_FRACTION
    n = (t1.toordinal() - t0.toordinal()) * DAY_FRACTION
    return (prod - 1.0) / n


def arithmetic_average(path: RatePath, t0: dt.date, t1: dt.date, holidays=()) -> float:
    """Mean daily rate over [t0, t1) with the same holiday-fill rule."""
    if t0 >= t1:
        raise ValueError("need t0 < t1")
    rates = _daily_rates(path, t0, t1, holidays)
    return math.fsum(rates) / len(rates)


def curve_rate_path(curve: ForwardCurve, start: dt.date, n_days: int) -> RatePath:
    """Deterministic rate path implied by rolling the curve's own forwards."""
    dates = tuple(dt.date.fromordinal(start.toordinal() + i) for i in range(n_days))
    rates = tuple(
        math.expm1(float(curve.rate(i)) * DAY_FRACTION) / DAY_FRACTION for i in range(n_days)
    )
    return RatePath(dates, rates)
