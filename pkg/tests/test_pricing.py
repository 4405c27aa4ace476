import math

import numpy as np
import pytest

from sofrsim.curve import BasisFamily
from sofrsim.dates import DAY_FRACTION
from sofrsim.errors import HorizonTooShortError, PriceOverflowError
from sofrsim.pricing import (
    FUTURES_MULTIPLIER,
    DerivativeSpec,
    compounded_average,
    implied_period_rate,
    indifference_price_maturity,
    indifference_price_spot,
    payouts,
    price,
    rollover_factors,
    zcb_prices_at,
)
from sofrsim.simulation import ScenarioSet, SimulationConfig
from sofrsim.transforms import ShiftConfig

# frozen via a 50-digit oracle: (1 + 0.05/360)**90
ROLL_5PCT_90D = 1.0125775726480435
# (0.0528 - geometric average of the 5% path) * 250000
FUTURES_PAYOUT_5PCT = 622.4273519564534


def flat_scenario_set(basis, shifts, rate=0.05, n=3, days=400, snapshots=(), snapshot_coeff=None):
    """All-scenario-identical set with a constant overnight rate and flat
    curve snapshots (coefficient level overridable per test)."""
    coeff = snapshot_coeff if snapshot_coeff is not None else math.log1p(rate * DAY_FRACTION) / DAY_FRACTION
    cfg = SimulationConfig(
        n_scenarios=n,
        horizon_days=days,
        monthly_offsets=(30,),
        antithetic=False,
        xi_snapshot_days=tuple(snapshots),
    )
    k = basis.size
    return ScenarioSet(
        config=cfg,
        basis=basis,
        shifts=shifts,
        macro=np.zeros((n, 2, 3)),
        floor_meeting=np.full((n, 2), rate),
        sofr=np.full((n, days + 1), rate),
        xi=None,
        xi_snapshots={d: np.full((n, k), coeff) for d in snapshots},
    )


@pytest.fixture(scope="module")
def flat(basis_module, shifts_module):
    return flat_scenario_set(basis_module, shifts_module)


@pytest.fixture(scope="module")
def basis_module():
    return BasisFamily("linear", (0, 30, 90, 180, 365, 730, 1095, 1460, 1825))


@pytest.fixture(scope="module")
def shifts_module():
    return ShiftConfig()


def test_spec_validation():
    with pytest.raises(ValueError):
        DerivativeSpec(kind="futures3m", t0=10, t1=100)  # no traded rate
    with pytest.raises(ValueError):
        DerivativeSpec(kind="call_on_futures", t1=100, t2=50, strike=0.04)
    with pytest.raises(ValueError):
        DerivativeSpec(kind="swaption", maturity=100, strike=0.03, multiplier=-1)
    with pytest.raises(ValueError):
        DerivativeSpec(kind="unknown_thing")
    swap = DerivativeSpec(kind="swaption", maturity=1800, strike=0.033769, multiplier=1.0)
    assert swap.payment_offsets == (360, 720, 1080, 1440, 1800)
    assert swap.pricing_convention == "pay-at-maturity"
    opt = DerivativeSpec(kind="call_on_futures", t1=112, t2=203, strike=0.045)
    assert opt.settlement_day == 111
    assert opt.pricing_convention == "pay-at-spot"


def test_rollover_factors(flat):
    assert rollover_factors(flat, 0, 0) == pytest.approx(np.ones(3))
    roll = rollover_factors(flat, 0, 90)
    assert roll == pytest.approx(np.full(3, ROLL_5PCT_90D), abs=1e-8)
    # zero rates
    zero = flat_scenario_set(flat.basis, flat.shifts, rate=0.0)
    assert rollover_factors(zero, 0, 250) == pytest.approx(np.ones(3))
    # multiplicativity
    a = rollover_factors(flat, 0, 40) * rollover_factors(flat, 40, 90)
    assert a == pytest.approx(roll, rel=1e-12)
    with pytest.raises(HorizonTooShortError):
        rollover_factors(flat, 0, 100_000)


def test_futures_payout_oracle(flat):
    spec = DerivativeSpec(kind="futures3m", t0=0, t1=90, traded_rate=0.0528)
    cash = payouts(spec, flat)
    assert cash == pytest.approx(np.full(3, FUTURES_PAYOUT_5PCT), abs=1e-8)
    avg = compounded_average(flat, 0, 90)
    assert avg == pytest.approx(np.full(3, 0.050310290592174186), abs=1e-10)


def test_option_payouts_exact(basis_module, shifts_module):
    # flat coefficient level chosen so the implied (112, 203) period rate is exactly 4%
    n_days = 203 - 112
    coeff = math.log1p(0.04 * n_days * DAY_FRACTION) / (n_days * DAY_FRACTION)
    sset = flat_scenario_set(
        basis_module, shifts_module, rate=0.04, snapshots=(111,), snapshot_coeff=coeff
    )
    call = DerivativeSpec(kind="call_on_futures", t1=112, t2=203, strike=0.045)
    put = DerivativeSpec(kind="put_on_futures", t1=112, t2=203, strike=0.045)
    under = implied_period_rate(sset, 111, 112, 203)
    assert under == pytest.approx(np.full(3, 0.04), abs=1e-12)
    assert payouts(call, sset) == pytest.approx(np.full(3, 0.005 * FUTURES_MULTIPLIER), abs=1e-6)
    assert payouts(put, sset) == pytest.approx(np.zeros(3), abs=0)


def test_swaption_payout_zero_rates(basis_module, shifts_module):
    sset = flat_scenario_set(basis_module, shifts_module, rate=0.0, days=1830, snapshots=(1800,))
    spec = DerivativeSpec(kind="swaption", maturity=1800, strike=0.033769, multiplier=1.0)
    zcb = zcb_prices_at(sset, 1800, spec.payment_offsets)
    assert zcb == pytest.approx(np.ones((3, 5)), abs=1e-14)
    cash = payouts(spec, sset)
    assert cash == pytest.approx(np.full(3, 5 * 0.033769), rel=1e-12)


def test_payout_horizon_guard(flat):
    spec = DerivativeSpec(kind="futures3m", t0=0, t1=100_000, traded_rate=0.05)
    with pytest.raises(HorizonTooShortError):
        payouts(spec, flat)


# ---------------------------------------------------------------------------
# indifference prices
# ---------------------------------------------------------------------------


def test_single_scenario_identities():
    c = np.array([0.62])
    roll = np.array([1.0126])
    assert indifference_price_maturity(c, roll, 0.7, 1.3).alpha == pytest.approx(0.62, abs=1e-12)
    assert indifference_price_spot(c, roll, 0.7).alpha == pytest.approx(0.62 / 1.0126, abs=1e-12)


def test_zero_payout_prices_zero():
    c = np.zeros(11)
    roll = np.linspace(1.0, 1.1, 11)
    assert indifference_price_maturity(c, roll, 0.5, 2.0).alpha == pytest.approx(0.0, abs=1e-12)
    assert indifference_price_spot(c, roll, 0.5).alpha == pytest.approx(0.0, abs=1e-12)


def test_two_point_closed_form():
    c = np.array([0.0, 1.0])
    roll = np.ones(2)
    est = indifference_price_spot(c, roll, 1.0)
    assert est.alpha == pytest.approx(math.log((1 + math.e) / 2), abs=1e-12)


def test_small_rho_limit_matches_tilted_mean_oracle():
    rng = np.random.default_rng(11)
    c = rng.normal(0.5, 0.2, 5000)
    roll = 1 + rng.normal(0.01, 0.003, 5000)
    wealth, rho = 2.0, 1e-8
    est = indifference_price_maturity(c, roll, rho, wealth)
    # independent small-rho oracle: E[c e^{-rho w roll}] / E[e^{-rho w roll}]
    weights = np.exp(-rho * wealth * roll)
    expected = float(np.sum(c * weights) / np.sum(weights))
    assert est.alpha == pytest.approx(expected, rel=1e-6)


def test_translation_invariance():
    rng = np.random.default_rng(12)
    c = rng.normal(0.3, 0.1, 2000)
    roll = 1 + rng.normal(0.01, 0.002, 2000)
    base = indifference_price_maturity(c, roll, 0.8, 1.5).alpha
    shifted = indifference_price_maturity(c + 0.77, roll, 0.8, 1.5).alpha
    assert shifted - base == pytest.approx(0.77, abs=1e-12)


def test_translation_at_contract_scale():
    rng = np.random.default_rng(13)
    c = rng.normal(600.0, 90.0, 4000)
    roll = 1 + rng.normal(0.012, 0.003, 4000)
    base = indifference_price_maturity(c, roll, 1e-3, 1e5).alpha
    shifted = indifference_price_maturity(c + 123.0, roll, 1e-3, 1e5).alpha
    assert shifted - base == pytest.approx(123.0, rel=1e-10, abs=1e-9)


def test_bounds_and_monotonicity_in_rho():
    rng = np.random.default_rng(14)
    c = rng.normal(500.0, 120.0, 3000)
    roll = 1 + rng.normal(0.013, 0.004, 3000)
    ratios = c / roll
    alphas = [indifference_price_spot(c, roll, rho).alpha for rho in (1e-6, 1e-5, 1e-4, 1e-3, 5e-3)]
    assert all(b >= a - 1e-12 for a, b in zip(alphas, alphas[1:]))
    assert ratios.min() - 1e-9 <= alphas[0] and alphas[-1] <= ratios.max() + 1e-9
    # maturity-version bounds in payout units
    wealth = 1e4
    alpha_m = indifference_price_maturity(c, roll, 1e-4, wealth).alpha
    assert c.min() - 1.0 <= alpha_m <= c.max() + 1.0


def test_permutation_invariance_exact():
    rng = np.random.default_rng(15)
    c = rng.normal(600.0, 80.0, 4000)
    roll = 1 + rng.normal(0.01, 0.002, 4000)
    perm = rng.permutation(4000)
    a1 = indifference_price_maturity(c, roll, 1e-3, 1e5)
    a2 = indifference_price_maturity(c[perm], roll[perm], 1e-3, 1e5)
    assert a1.alpha == a2.alpha  # exactly-rounded sums
    s1 = indifference_price_spot(c, roll, 1e-3)
    s2 = indifference_price_spot(c[perm], roll[perm], 1e-3)
    assert s1.alpha == s2.alpha


def test_overflow_guard():
    with pytest.raises(PriceOverflowError):
        indifference_price_spot(np.array([np.inf, 1.0]), np.ones(2), 1.0)


def test_stderr_shrinks_with_sample_size():
    rng = np.random.default_rng(16)
    c = rng.normal(500.0, 100.0, 40_000)
    roll = 1 + rng.normal(0.01, 0.002, 40_000)
    small = indifference_price_maturity(c[:1000], roll[:1000], 1e-3, 1e4).stderr
    big = indifference_price_maturity(c, roll, 1e-3, 1e4).stderr
    assert big < small
    assert big == pytest.approx(small / math.sqrt(40), rel=0.5)


def test_price_dispatch_by_convention(basis_module, shifts_module):
    n_days = 203 - 112
    coeff = math.log1p(0.04 * n_days * DAY_FRACTION) / (n_days * DAY_FRACTION)
    sset = flat_scenario_set(
        basis_module, shifts_module, rate=0.04, snapshots=(111,), snapshot_coeff=coeff
    )
    fut = DerivativeSpec(kind="futures3m", t0=0, t1=90, traded_rate=0.0528)
    est = price(fut, sset, rho=1e-4, wealth=10.0)
    # identical scenarios: price equals the common payout
    assert est.alpha == pytest.approx(payouts(fut, sset)[0], rel=1e-9)
    call = DerivativeSpec(kind="call_on_futures", t1=112, t2=203, strike=0.045)
    est2 = price(call, sset, rho=1e-4)
    roll = rollover_factors(sset, 0, 111)[0]
    assert est2.alpha == pytest.approx(0.005 * FUTURES_MULTIPLIER / roll, rel=1e-9)
