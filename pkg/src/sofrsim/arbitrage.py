"""Sampled no-arbitrage checks via convex-hull membership linear programs.

A futures (or zero-coupon bond) market model is arbitrage-free when today's
exponentiated period growth vector lies in the relative interior of the
convex hull of its conditional one-day-ahead support.  The support is
approximated by Monte Carlo draws, so verdicts certify the *simulated* model
at the reported sample size, not the true conditional support.  Membership is
decided by a dense phase-1 simplex; interiority by feasibility of 2J
epsilon-perturbed copies of the point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .curve import BasisFamily, ForwardCurve
from .dates import DAY_FRACTION
from .errors import (
    DegenerateSamplesError,
    DimensionTooLargeError,
    OutOfRangeError,
)
from .transforms import ShiftConfig
from .var import VarModel

DEFAULT_EPS = 1e-8
ZCB_DIMENSION_CAP = 64
_FEAS_TOL = 1e-9
_MIN_UNIFORM = 2.0**-64


# ---------------------------------------------------------------------------
# period growth vectors
# ---------------------------------------------------------------------------


def period_log_growth(curve: ForwardCurve, periods, day: int = 0) -> np.ndarray:
    """Log gross growth of each reference period as seen from *day*."""
    out = np.empty(len(periods))
    for j, (t0, t1) in enumerate(periods):
        if t0 - day < 0:
            raise OutOfRangeError(f"period ({t0}, {t1}) already started at day {day}")
        out[j] = curve.accrual(t0 - day, t1 - day)
    return out


def period_weight_matrix(basis: BasisFamily, periods, day: int = 0) -> np.ndarray:
    """Rows of delta-weighted basis sums; growth = matrix @ coefficients."""
    rows = []
    for t0, t1 in periods:
        if t0 - day < 0:
            raise OutOfRangeError(f"period ({t0}, {t1}) already started at day {day}")
        rows.append(basis.period_weights(t0 - day, t1 - day))
    return np.asarray(rows)


def cumulative_discount_map(rates: np.ndarray) -> np.ndarray:
    """Componentwise exp of the running negative accrual: strictly decreasing
    in its index for strictly positive rate curves."""
    arr = np.asarray(rates, dtype=float)
    flat = arr.ndim == 1
    out = np.exp(-np.cumsum(np.atleast_2d(arr) * DAY_FRACTION, axis=1))
    return out[0] if flat else out


# ---------------------------------------------------------------------------
# hull membership LP
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HullVerdict:
    status: str  # 'interior' | 'boundary' | 'outside'
    margin: float  # eps if interior, 0 at boundary, -(infeasibility) outside
    n_samples: int


def _phase1_feasible(point: np.ndarray, samples: np.ndarray, tol: float = _FEAS_TOL):
    """Does a convex combination of the sample rows equal *point*?

    Solves the phase-1 LP  min sum(artificials)  s.t.  [samples^T; 1^T] w +
    artificials = [point; 1], w >= 0, with Bland's rule.  Returns
    (feasible, infeasibility measure).
    """
    m_samples, dim = samples.shape
    a = np.vstack([samples.T, np.ones((1, m_samples))])
    b = np.concatenate([point, [1.0]])
    scale = np.maximum(np.abs(a).max(axis=1), np.abs(b))
    scale[scale == 0] = 1.0
    a = a / scale[:, None]
    b = b / scale
    m, n = a.shape
    flip = b < 0
    a[flip] *= -1.0
    b[flip] *= -1.0

    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = a
    tableau[:m, n : n + m] = np.eye(m)
    tableau[:m, -1] = b
    tableau[m, :n] = -a.sum(axis=0)
    tableau[m, -1] = -b.sum()
    basis = list(range(n, n + m))

    max_iter = 50 * (n + m)
    for _ in range(max_iter):
        reduced = tableau[m, : n + m]
        candidates = np.where(reduced < -1e-11)[0]
        if candidates.size == 0:
            break
        enter = int(candidates[0])  # Bland's rule: lowest index
        col = tableau[:m, enter]
        positive = col > 1e-11
        if not positive.any():
            break
        ratios = np.full(m, np.inf)
        ratios[positive] = tableau[:m, -1][positive] / col[positive]
        best = ratios.min()
        ties = np.where(ratios <= best * (1 + 1e-12) + 1e-300)[0]
        leave = int(min(ties, key=lambda r: basis[r]))
        pivot = tableau[leave, enter]
        tableau[leave] /= pivot
        for i in range(m + 1):
            if i != leave and tableau[i, enter] != 0.0:
                tableau[i] -= tableau[i, enter] * tableau[leave]
        basis[leave] = enter

    infeasibility = max(-tableau[m, -1], 0.0)
    return infeasibility <= tol, infeasibility


def hull_membership(point, samples, eps: float = DEFAULT_EPS) -> HullVerdict:
    """Classify *point* against the convex hull of *samples*.

    interior: the point and all 2J axis perturbations of size *eps* are
    convex combinations of the samples; boundary: the point is but some
    perturbation is not; outside: the point itself is not.
    """
    point = np.asarray(point, dtype=float)
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != point.size:
        raise ValueError("samples must be (M, dim) matching the point")
    spread = np.abs(samples - samples[0]).max()
    if spread <= 1e-14 * (1.0 + np.abs(samples[0]).max()):
        raise DegenerateSamplesError("all support samples are identical")
    feasible, infeas = _phase1_feasible(point, samples)
    if not feasible:
        return HullVerdict("outside", -infeas, samples.shape[0])
    for j in range(point.size):
        for sign in (1.0, -1.0):
            shifted = point.copy()
            shifted[j] += sign * eps
            ok, _ = _phase1_feasible(shifted, samples)
            if not ok:
                return HullVerdict("boundary", 0.0, samples.shape[0])
    return HullVerdict("interior", eps, samples.shape[0])


# ---------------------------------------------------------------------------
# conditional one-day-ahead draws
# ---------------------------------------------------------------------------


def _draws(seed: int, tag: int, shape) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, tag], dtype=np.uint64)))
    u = gen.random(math.prod(shape))
    return ndtri(np.maximum(u, _MIN_UNIFORM)).reshape(shape)


def _coeffs_from_state(factors, floor, shifts: ShiftConfig):
    """Vectorized shifted-log chain: factor rows -> coefficient rows."""
    factors = np.atleast_2d(np.asarray(factors, dtype=float))
    floor = np.asarray(floor, dtype=float)
    c = shifts.shifts_array()
    out = np.empty_like(factors)
    out[:, 0] = np.exp(factors[:, 0]) + floor - c[0]
    for k in range(1, factors.shape[1]):
        out[:, k] = np.exp(factors[:, k]) * (out[:, k - 1] + c[k - 1]) - c[k]
    return out


def next_day_states(
    macro_model: VarModel,
    curve_model: VarModel,
    shifts: ShiftConfig,
    macro_state,
    curve_factors,
    day: int,
    n_samples: int,
    seed: int = 0,
    meeting_offsets=(),
):
    """Monte Carlo one-day-ahead (coefficients, floor) draws from a frozen state.

    The macro layer only moves when day + 1 is a meeting; otherwise the floor
    carries over deterministically.
    """
    macro_state = np.asarray(macro_state, dtype=float)
    curve_factors = np.asarray(curve_factors, dtype=float)
    k = curve_factors.size
    z = _draws(seed, 2 * day + 1, (n_samples, k))
    eps = z @ curve_model.chol.T
    base = curve_factors + curve_model.amat @ curve_factors + curve_model.drift_at(day)
    factors_next = base + eps
    meetings = np.asarray(sorted(int(o) for o in meeting_offsets))
    if meetings.size and day + 1 in meetings:
        macro_step = int(np.searchsorted(meetings, day, side="right"))
        zm = _draws(seed, 2 * day + 2, (n_samples, macro_model.dim))
        em = zm @ macro_model.chol.T
        macro_next = (
            macro_state + macro_model.amat @ macro_state + macro_model.drift_at(macro_step)
        ) + em
        floor_next = np.exp(macro_next[:, 0]) - shifts.floor_shift
    else:
        floor_next = np.full(n_samples, math.exp(macro_state[0]) - shifts.floor_shift)
    return _coeffs_from_state(factors_next, floor_next, shifts), floor_next


def _degenerate_verdict(point, samples) -> HullVerdict:
    gap = float(np.abs(samples - point).max())
    if gap <= 1e-12 * (1.0 + np.abs(point).max()):
        return HullVerdict("boundary", 0.0, samples.shape[0])
    return HullVerdict("outside", -gap, samples.shape[0])


def check_futures_noarb(
    macro_model: VarModel,
    curve_model: VarModel,
    shifts: ShiftConfig,
    basis: BasisFamily,
    macro_state,
    curve_factors,
    periods,
    day: int = 0,
    eps: float = DEFAULT_EPS,
    n_samples: int = 500,
    seed: int = 0,
    meeting_offsets=(),
) -> HullVerdict:
    """Sampled futures no-arbitrage condition at *day*.

    Point: exponentiated period growth of today's curve.  Samples: the same
    map applied to M conditional next-day curves.  An interior verdict
    certifies the sampled sufficient condition.
    """
    floor = math.exp(np.asarray(macro_state, dtype=float)[0]) - shifts.floor_shift
    coeffs_now = _coeffs_from_state(curve_factors, np.array(floor), shifts)[0]
    w_now = period_weight_matrix(basis, periods, day)
    point = np.exp(w_now @ coeffs_now)
    coeffs_next, _ = next_day_states(
        macro_model, curve_model, shifts, macro_state, curve_factors,
        day, n_samples, seed, meeting_offsets,
    )
    w_next = period_weight_matrix(basis, periods, day + 1)
    samples = np.exp(coeffs_next @ w_next.T)
    try:
        return hull_membership(point, samples, eps)
    except DegenerateSamplesError:
        return _degenerate_verdict(point, samples)


def check_zcb_noarb(
    macro_model: VarModel,
    curve_model: VarModel,
    shifts: ShiftConfig,
    basis: BasisFamily,
    macro_state,
    curve_factors,
    horizon: int,
    day: int = 0,
    eps: float = DEFAULT_EPS,
    n_samples: int = 500,
    seed: int = 0,
    meeting_offsets=(),
) -> HullVerdict:
    """Sampled zero-coupon-bond no-arbitrage condition at *day*.

    Point: cumulative discounts of today's forwards at offsets 1..horizon.
    Samples: cumulative discounts of next-day forwards at offsets
    0..horizon-1.  The dimension is capped for LP conditioning.
    """
    if horizon > ZCB_DIMENSION_CAP:
        raise DimensionTooLargeError(
            f"horizon {horizon} exceeds the {ZCB_DIMENSION_CAP}-dimension cap"
        )
    floor = math.exp(np.asarray(macro_state, dtype=float)[0]) - shifts.floor_shift
    coeffs_now = _coeffs_from_state(curve_factors, np.array(floor), shifts)[0]
    rates_now = basis.interpolate(np.arange(1, horizon + 1, dtype=float), coeffs_now)
    point = cumulative_discount_map(rates_now)
    coeffs_next, _ = next_day_states(
        macro_model, curve_model, shifts, macro_state, curve_factors,
        day, n_samples, seed, meeting_offsets,
    )
    grid = np.arange(0, horizon, dtype=float)
    rates_next = np.vstack([basis.interpolate(grid, row) for row in coeffs_next])
    samples = cumulative_discount_map(rates_next)
    try:
        return hull_membership(point, samples, eps)
    except DegenerateSamplesError:
        return _degenerate_verdict(point, samples)
