"""Fit forward-curve coefficients to futures quotes.

Mid quotes: minimum-norm least squares via the pseudoinverse.  Bid/ask
quotes: the convex problem  min ||e||^2  s.t.  lo <= A x + e <= hi, solved
through its unconstrained piecewise-quadratic equivalent in x (the optimal e
is the projection residual of A x onto the band), with Newton steps on the
active quadratic piece and a secondary least-norm solve to break ties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curve import BasisFamily
from .dates import DAY_FRACTION
from .errors import (
    EmptyQuoteSetError,
    NumericalFailureError,
    QuoteOutOfRangeError,
)

_GRAD_TOL = 1e-11
_TIE_TOL = 1e-10


@dataclass(frozen=True)
class Quote:
    """Futures quote over a reference period in day offsets."""

    t0: int
    t1: int
    kind: str  # '3M' | '1M'
    bid: float
    ask: float

    def __post_init__(self):
        if self.t0 >= self.t1:
            raise ValueError("quote period must have t0 < t1")
        if self.bid > self.ask:
            raise ValueError(f"bid {self.bid} above ask {self.ask}")

    @property
    def mid(self) -> float:
        return 0.5 * (self.bid + self.ask)


def log_growth(rate: float, n_days: int) -> float:
    """ln(1 + rate * n * delta): period log growth implied by a simple rate."""
    return math.log1p(rate * n_days * DAY_FRACTION)


@dataclass(frozen=True)
class CalibrationSystem:
    """Linear consistency system assembled from quotes."""

    design: np.ndarray  # (J, K)
    b_mid: np.ndarray
    b_lo: np.ndarray
    b_hi: np.ndarray
    basis: BasisFamily
    fixed: tuple[tuple[int, float], ...] = ()
    taylor_rows: tuple[int, ...] = ()  # 1M rows priced via the log-linear approximation

    @property
    def shape(self) -> tuple[int, int]:
        return self.design.shape


@dataclass(frozen=True)
class CalibrationResult:
    coeffs: np.ndarray
    residuals: np.ndarray
    objective: float
    rank: int
    iterations: int
    singular_values: np.ndarray | None = None


def build_system(
    quotes,
    basis: BasisFamily,
    anchor_sofr: float | None = None,
    cutoff: int | None = None,
) -> CalibrationSystem:
    """Assemble design rows delta * sum(phi_k) and log-growth bounds.

    With *anchor_sofr* given, the first coefficient is pinned to the forward
    consistent with the observed overnight rate.
    """
    quotes = list(quotes)
    if not quotes:
        raise EmptyQuoteSetError("no quotes supplied")
    lim = cutoff if cutoff is not None else int(basis.tenors[-1])
    rows = []
    b_mid = []
    b_lo = []
    b_hi = []
    taylor = []
    for j, q in enumerate(quotes):
        if q.t0 < 0 or q.t1 > lim:
            raise QuoteOutOfRangeError(
                f"quote period ({q.t0}, {q.t1}) outside [0, {lim}]"
            )
        rows.append(basis.period_weights(q.t0, q.t1))
        n = q.t1 - q.t0
        b_mid.append(log_growth(q.mid, n))
        b_lo.append(log_growth(q.bid, n))
        b_hi.append(log_growth(q.ask, n))
        if q.kind.upper() == "1M":
            taylor.append(j)
    fixed = ()
    if anchor_sofr is not None:
        fixed = ((0, math.log1p(anchor_sofr * DAY_FRACTION) / DAY_FRACTION),)
    return CalibrationSystem(
        design=np.asarray(rows),
        b_mid=np.asarray(b_mid),
        b_lo=np.asarray(b_lo),
        b_hi=np.asarray(b_hi),
        basis=basis,
        fixed=fixed,
        taylor_rows=tuple(taylor),
    )


def _split_fixed(system: CalibrationSystem):
    k = system.design.shape[1]
    fixed_idx = [i for i, _ in system.fixed]
    fixed_val = np.array([v for _, v in system.fixed])
    free_idx = [i for i in range(k) if i not in fixed_idx]
    shift = system.design[:, fixed_idx] @ fixed_val if fixed_idx else np.zeros(system.design.shape[0])
    return free_idx, fixed_idx, fixed_val, system.design[:, free_idx], shift


def _assemble(k, free_idx, fixed_idx, fixed_val, sol):
    out = np.empty(k)
    out[free_idx] = sol
    if fixed_idx:
        out[fixed_idx] = fixed_val
    return out


def solve_mid(system: CalibrationSystem, rtol: float = 1e-10) -> CalibrationResult:
    """Minimum-norm least-squares fit to the mid-quote system."""
    free_idx, fixed_idx, fixed_val, a_free, shift = _split_fixed(system)
    rhs = system.b_mid - shift
    try:
        sol, _, rank, svals = np.linalg.lstsq(a_free, rhs, rcond=rtol)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError("SVD failed to converge") from exc
    coeffs = _assemble(system.design.shape[1], free_idx, fixed_idx, fixed_val, sol)
    resid = system.b_mid - system.design @ coeffs
    return CalibrationResult(
        coeffs=coeffs,
        residuals=resid,
        objective=float(resid @ resid),
        rank=int(rank),
        iterations=1,
        singular_values=svals,
    )


def _band_violation(v, lo, hi):
    """Signed correction e with lo <= v + e <= hi and |e| minimal."""
    return np.where(v < lo, lo - v, np.where(v > hi, hi - v, 0.0))


def _line_search(v, u, lo, hi):
    """Exact minimizer of s -> ||viol(v + s u)||^2 on s >= 0 (convex
    piecewise quadratic; derivative is piecewise linear increasing)."""

    def dphi(s):
        e = _band_violation(v + s * u, lo, hi)
        return -2.0 * float(e @ u)

    if dphi(0.0) >= 0.0:
        return 0.0
    breaks = []
    for j in range(v.size):
        if u[j] != 0.0:
            for bound in (lo[j], hi[j]):
                s = (bound - v[j]) / u[j]
                if s > 0.0:
                    breaks.append(s)
    breaks = sorted(set(breaks))
    prev = 0.0
    dprev = dphi(0.0)
    for s in breaks + [None]:
        if s is None:
            # last segment: solve linearly using a probe point
            probe = prev + 1.0
            dp = dphi(probe)
            slope = dp - dprev
            if slope <= 0.0:
                return probe  # flat or degenerate: any further point is optimal
            return prev - dprev / slope * 1.0
        dcur = dphi(s)
        if dcur >= 0.0:
            slope = (dcur - dprev) / (s - prev) if s > prev else 0.0
            if slope <= 0.0:
                return s
            return prev - dprev / slope
        prev, dprev = s, dcur


def _min_norm_in_polyhedron(a_eq, b_eq, a_in, lo_in, hi_in, x0, max_iter=200):
    """min ||x||^2 s.t. a_eq x = b_eq, lo <= a_in x <= hi, from feasible x0.

    Dense active-set loop with identity Hessian; returns x0 unchanged on
    failure to converge (callers treat the result as a tie-break refinement).
    """
    x = x0.copy()
    n_in = a_in.shape[0]
    active: list[tuple[int, int]] = []  # (row, side) side=+1 upper, -1 lower
    tol = 1e-12 * (1.0 + float(np.abs(np.concatenate([b_eq, lo_in, hi_in])).max() if b_eq.size + n_in else 1.0))
    for _ in range(max_iter):
        rows = [a_eq[i] for i in range(a_eq.shape[0])]
        rhs = list(b_eq)
        for j, side in active:
            rows.append(a_in[j])
            rhs.append(hi_in[j] if side > 0 else lo_in[j])
        if rows:
            cmat = np.vstack(rows)
            dvec = np.asarray(rhs)
            z, _, _, _ = np.linalg.lstsq(cmat, dvec, rcond=None)
        else:
            z = np.zeros_like(x)
        step_dir = z - x
        if np.abs(step_dir).max() < 1e-14:
            # candidate reached; check multiplier signs for active inequalities
            if not active:
                return z
            signed = np.vstack(
                [a_eq] + [a_in[j] * side for j, side in active]
            )
            lam, _, _, _ = np.linalg.lstsq(signed.T, -z, rcond=None)
            mult = lam[a_eq.shape[0]:]
            worst = int(np.argmin(mult)) if mult.size else -1
            if worst < 0 or mult[worst] >= -1e-9:
                return z
            active.pop(worst)
            continue
        alpha = 1.0
        blocking = None
        vals = a_in @ x if n_in else np.empty(0)
        dirs = a_in @ step_dir if n_in else np.empty(0)
        active_rows = {j for j, _ in active}
        for j in range(n_in):
            if j in active_rows:
                continue
            if dirs[j] > tol:
                a_j = (hi_in[j] - vals[j]) / dirs[j]
                if a_j < alpha:
                    alpha, blocking = a_j, (j, 1)
            elif dirs[j] < -tol:
                a_j = (lo_in[j] - vals[j]) / dirs[j]
                if a_j < alpha:
                    alpha, blocking = a_j, (j, -1)
        alpha = max(alpha, 0.0)
        x = x + alpha * step_dir
        if blocking is None:
            x = z
        else:
            active.append(blocking)
    return x0


def solve_bidask(system: CalibrationSystem, max_iter: int = 200) -> CalibrationResult:
    """Global minimizer of the band-violation objective.

    The solver works on the equivalent unconstrained objective
    f(x) = sum_j viol_j(A x)^2, taking Newton steps to the minimum of the
    current quadratic piece (min-norm when the piece is degenerate) with an
    exact line search.  Among the minimizers, the coefficient vector of least
    Euclidean norm is returned.
    """
    if np.any(system.b_lo > system.b_hi):
        raise ValueError("lower bounds exceed upper bounds")
    free_idx, fixed_idx, fixed_val, a_free, shift = _split_fixed(system)
    lo = system.b_lo - shift
    hi = system.b_hi - shift
    j_rows, k_free = a_free.shape

    x, _, _, _ = np.linalg.lstsq(a_free, 0.5 * (lo + hi), rcond=None)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        v = a_free @ x
        e = _band_violation(v, lo, hi)
        grad = -2.0 * (a_free.T @ e)
        gnorm = float(np.abs(grad).max()) if grad.size else 0.0
        if gnorm <= _GRAD_TOL:
            break
        below = v < lo
        above = v > hi
        act = below | above
        if not act.any():
            break  # feasible point: gradient is zero
        target = np.where(below, lo, hi)[act]
        try:
            piece_min, _, _, _ = np.linalg.lstsq(a_free[act], target, rcond=None)
            step_dir = piece_min - x
        except np.linalg.LinAlgError:
            step_dir = -grad  # degenerate piece: fall back to gradient descent
        s = _line_search(v, a_free @ step_dir, lo, hi)
        if s <= 0.0:
            step_dir = -grad
            s = _line_search(v, a_free @ step_dir, lo, hi)
            if s <= 0.0:
                break
        x = x + s * step_dir
    else:
        raise NumericalFailureError("bid-ask solver did not converge")

    v = a_free @ x
    e_free = _band_violation(v, lo, hi)
    f_star = float(e_free @ e_free)

    # tie-break: pin strictly violated rows at their optimal values, then
    # take the least-norm coefficient vector inside the remaining bands
    strict = np.abs(e_free) > _TIE_TOL * (1.0 + np.abs(v))
    x_tie = _min_norm_in_polyhedron(
        a_free[strict], v[strict], a_free[~strict], lo[~strict], hi[~strict], x
    )
    e_tie = _band_violation(a_free @ x_tie, lo, hi)
    f_tie = float(e_tie @ e_tie)
    if f_tie <= f_star + 1e-12 * (1.0 + f_star) and float(x_tie @ x_tie) <= float(x @ x) + 1e-12:
        x, e_free = x_tie, e_tie
        f_star = f_tie

    coeffs = _assemble(system.design.shape[1], free_idx, fixed_idx, fixed_val, x)
    resid = _band_violation(system.design @ coeffs, system.b_lo, system.b_hi)
    rank = int(np.linalg.matrix_rank(a_free)) if a_free.size else 0
    return CalibrationResult(
        coeffs=coeffs,
        residuals=resid,
        objective=float(resid @ resid),
        rank=rank,
        iterations=iterations,
    )


def daily_backfill(quote_history, basis: BasisFamily, anchors=None):
    """Independent mid-quote solves for each (date, quotes) entry.

    *anchors* optionally maps date -> overnight rate.  Per-day failures are
    collected as exceptions in the result list rather than aborting.
    """
    out = []
    anchors = anchors or {}
    for date, quotes in sorted(quote_history, key=lambda p: p[0]):
        try:
            system = build_system(quotes, basis, anchor_sofr=anchors.get(date))
            out.append((date, solve_mid(system)))
        except Exception as exc:  # per-day diagnostics, deliberately broad
            out.append((date, exc))
    return out
