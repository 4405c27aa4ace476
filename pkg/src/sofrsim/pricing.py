"""Scenario payouts of SOFR derivatives and exponential-utility indifference
selling prices.

Futures and swaptions settle at maturity, so their price solves an
indifference equation against the compounded overnight roll-over account;
options are paid upfront and are priced with the roll-over account as
numeraire.  All expectations of exponentials go through log-sum-exp with
exactly-rounded (fsum) accumulation, which makes prices invariant under
scenario permutations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dates import DAY_FRACTION
from .errors import HorizonTooShortError, PriceOverflowError
from .simulation import ScenarioSet

FUTURES_MULTIPLIER = 250_000.0


@dataclass(frozen=True)
class DerivativeSpec:
    """Payout descriptor for the supported instrument kinds.

    futures3m          : traded_rate, period (t0, t1), settles at t1
    call_on_futures /
    put_on_futures     : strike, underlying period (t1, t2), observed and
                         paid at t1 - 1
    swaption           : strike, maturity, payment_offsets relative to
                         maturity (yearly by default), settles at maturity
    """

    kind: str
    t0: int | None = None
    t1: int | None = None
    t2: int | None = None
    maturity: int | None = None
    strike: float | None = None
    traded_rate: float | None = None
    payment_offsets: tuple[int, ...] = ()
    multiplier: float = FUTURES_MULTIPLIER
    label: str = ""

    def __post_init__(self):
        if self.multiplier <= 0:
            raise ValueError("multiplier must be positive")
        if self.kind == "futures3m":
            if None in (self.t0, self.t1) or self.traded_rate is None:
                raise ValueError("futures3m needs t0, t1 and traded_rate")
            if not 0 <= self.t0 < self.t1:
                raise ValueError("futures period must satisfy 0 <= t0 < t1")
        elif self.kind in ("call_on_futures", "put_on_futures"):
            if None in (self.t1, self.t2) or self.strike is None:
                raise ValueError(f"{self.kind} needs t1, t2 and strike")
            if not 1 <= self.t1 < self.t2:
                raise ValueError("option underlying period must satisfy 1 <= t1 < t2")
        elif self.kind == "swaption":
            if self.maturity is None or self.strike is None:
                raise ValueError("swaption needs maturity and strike")
            offs = self.payment_offsets or tuple(360 * (k + 1) for k in range(5))
            if any(b <= a for a, b in zip((0,) + offs, offs)):
                raise ValueError("payment offsets must be strictly increasing")
            object.__setattr__(self, "payment_offsets", offs)
        else:
            raise ValueError(f"unknown derivative kind {self.kind!r}")

    @property
    def settlement_day(self) -> int:
        if self.kind == "futures3m":
            return self.t1
        if self.kind == "swaption":
            return self.maturity
        return self.t1 - 1

    @property
    def pricing_convention(self) -> str:
        return "pay-at-spot" if self.kind.endswith("on_futures") else "pay-at-maturity"


def rollover_factors(sset: ScenarioSet, t0: int, t1: int) -> np.ndarray:
    """Per-scenario compounded gross return of the overnight account on [t0, t1)."""
    if sset.sofr is None:
        raise HorizonTooShortError("sofr paths were not recorded")
    if not 0 <= t0 <= t1 <= sset.horizon_days:
        raise HorizonTooShortError(f"roll-over window ({t0}, {t1}) outside the horizon")
    if t0 == t1:
        return np.ones(sset.n_scenarios)
    return np.prod(1.0 + np.asarray(sset.sofr[:, t0:t1]) * DAY_FRACTION, axis=1)


def compounded_average(sset: ScenarioSet, t0: int, t1: int) -> np.ndarray:
    """Per-scenario compounded average rate over the reference period."""
    growth = rollover_factors(sset, t0, t1)
    return (growth - 1.0) / ((t1 - t0) * DAY_FRACTION)


def implied_period_rate(sset: ScenarioSet, obs_day: int, t0: int, t1: int) -> np.ndarray:
    """Futures rate for (t0, t1) implied by the curve observed on *obs_day*."""
    coeffs = sset.curve_snapshot(obs_day)
    w = sset.basis.period_weights(t0 - obs_day, t1 - obs_day)
    growth = np.asarray(coeffs) @ w
    return np.expm1(growth) / ((t1 - t0) * DAY_FRACTION)


def zcb_prices_at(sset: ScenarioSet, obs_day: int, maturities) -> np.ndarray:
    """(N, len(maturities)) zero-coupon prices from the curve at *obs_day*."""
    coeffs = np.asarray(sset.curve_snapshot(obs_day))
    out = np.empty((coeffs.shape[0], len(maturities)))
    for j, m in enumerate(maturities):
        w = sset.basis.period_weights(0, int(m))
        out[:, j] = np.exp(-(coeffs @ w))
    return out


def payouts(spec: DerivativeSpec, sset: ScenarioSet) -> np.ndarray:
    """Per-scenario settlement cashflow of the instrument, in currency."""
    if spec.settlement_day > sset.horizon_days:
        raise HorizonTooShortError(
            f"instrument settles on day {spec.settlement_day}, horizon is {sset.horizon_days}"
        )
    if spec.kind == "futures3m":
        realized = compounded_average(sset, spec.t0, spec.t1)
        return (spec.traded_rate - realized) * spec.multiplier
    if spec.kind in ("call_on_futures", "put_on_futures"):
        underlying = implied_period_rate(sset, spec.t1 - 1, spec.t1, spec.t2)
        if spec.kind == "call_on_futures":
            intrinsic = spec.strike - underlying
        else:
            intrinsic = underlying - spec.strike
        return np.maximum(intrinsic, 0.0) * spec.multiplier
    # swaption on a receiver-style OIS liquidation value
    offs = spec.payment_offsets
    zcb = zcb_prices_at(sset, spec.maturity, offs)
    accruals = np.diff(np.concatenate([[0], np.asarray(offs)])) * DAY_FRACTION
    annuity = zcb @ accruals
    value = spec.strike * annuity - 1.0 + zcb[:, -1]
    return np.maximum(value, 0.0) * spec.multiplier


def _log_mean_exp(args: np.ndarray) -> float:
    """ln(mean(exp(args))) with an exactly-rounded inner sum."""
    args = np.asarray(args, dtype=float)
    if not np.all(np.isfinite(args)):
        raise PriceOverflowError("non-finite exponent in indifference expectation")
    shift = float(args.max())
    total = math.fsum(np.exp(args - shift))
    if total <= 0.0 or not math.isfinite(total):
        raise PriceOverflowError("indifference expectation under/overflowed")
    return shift + math.log(total / args.size)


@dataclass(frozen=True)
class PriceEstimate:
    alpha: float
    stderr: float
    n_scenarios: int


def _delta_stderr_ratio(u: np.ndarray, v: np.ndarray, rho: float) -> float:
    """Monte Carlo standard error of (1/rho) * (ln mean e^u - ln mean e^v)."""
    n = u.size
    if n < 2:
        return 0.0
    a = np.exp(u - u.max())
    b = np.exp(v - v.max())
    ma, mb = a.mean(), b.mean()
    var = (
        a.var(ddof=1) / ma**2
        + b.var(ddof=1) / mb**2
        - 2.0 * np.cov(a, b, ddof=1)[0, 1] / (ma * mb)
    )
    return math.sqrt(max(var, 0.0) / n) / rho


def indifference_price_maturity(
    payout: np.ndarray, rollover: np.ndarray, rho: float, wealth: float
) -> PriceEstimate:
    """Selling price paid at settlement, against a rolled-over initial wealth.

    alpha = (1/rho) ln E[exp(-rho (wealth * roll - payout))]
                     / E[exp(-rho wealth * roll)].
    """
    if rho <= 0:
        raise ValueError("risk aversion must be positive")
    payout = np.asarray(payout, dtype=float)
    rollover = np.asarray(rollover, dtype=float)
    base = -rho * wealth * rollover
    u = base + rho * payout
    alpha = (_log_mean_exp(u) - _log_mean_exp(base)) / rho
    return PriceEstimate(alpha, _delta_stderr_ratio(u, base, rho), payout.size)


def indifference_price_spot(payout: np.ndarray, rollover: np.ndarray, rho: float) -> PriceEstimate:
    """Selling price received upfront, discounted scenario-wise by the
    roll-over account: alpha = (1/rho) ln E[exp(rho payout / roll)]."""
    if rho <= 0:
        raise ValueError("risk aversion must be positive")
    ratio = np.asarray(payout, dtype=float) / np.asarray(rollover, dtype=float)
    u = rho * ratio
    alpha = _log_mean_exp(u) / rho
    n = u.size
    if n >= 2:
        a = np.exp(u - u.max())
        stderr = math.sqrt(a.var(ddof=1) / a.mean() ** 2 / n) / rho
    else:
        stderr = 0.0
    return PriceEstimate(alpha, stderr, n)


def price(
    spec: DerivativeSpec,
    sset: ScenarioSet,
    rho: float,
    wealth: float = 0.0,
    pricing_day: int = 0,
) -> PriceEstimate:
    """Payout simulation plus the convention-appropriate indifference price."""
    c = payouts(spec, sset)
    roll = rollover_factors(sset, pricing_day, spec.settlement_day)
    if spec.pricing_convention == "pay-at-spot":
        return indifference_price_spot(c, roll, rho)
    return indifference_price_maturity(c, roll, rho, wealth)
