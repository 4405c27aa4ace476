"""Command-line pipeline: calibrate, fit, simulate, price, check-arb.

Exit codes: 0 ok, 2 input parsing, 3 infeasible/domain error, 4 numerical
failure, 5 horizon or dimension limits.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import sys
from pathlib import Path

import numpy as np

from . import arbitrage, calibration, pricing, simulation, transforms, var
from .config import AppConfig, config_basis, config_shifts, load_config
from .curve import ForwardCurve
from .dates import (
    day_offset,
    one_month_reference_period,
    read_date_file,
    three_month_reference_period,
)
from .errors import (
    ConfigError,
    DimensionTooLargeError,
    FactorDomainError,
    HorizonTooShortError,
    NumericalFailureError,
    SofrSimError,
    TooFewScenariosError,
)
from .model import ModelArtifact, load_artifact, save_artifact

_EXIT_PARSE = 2
_EXIT_DOMAIN = 3
_EXIT_NUMERIC = 4
_EXIT_LIMITS = 5

def _fmt(value) -> str:
    """Shortest round-trip decimal form for CSV output (plain float repr)."""
    return repr(float(value))



# ---------------------------------------------------------------------------
# file ingest
# ---------------------------------------------------------------------------


def price_to_rate(price: float) -> float:
    """Exchange price convention: rate = 1 - price / 100."""
    return 1.0 - price / 100.0


def read_quote_file(path):
    """Quote rows: date, kind (1M|3M), delivery (YYYY-MM), bid and ask prices.

    Prices are converted to rates on ingest; rows whose converted rates have
    bid above ask are rejected.
    """
    quotes: dict[dt.date, list] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"date", "kind", "delivery", "bid", "ask"}
        if reader.fieldnames is None or not required.issubset(set(reader.fieldnames)):
            raise ConfigError(f"{path}: expected columns {sorted(required)}")
        for lineno, row in enumerate(reader, 2):
            try:
                date = dt.date.fromisoformat(row["date"].strip())
                kind = row["kind"].strip().upper()
                year, month = (int(v) for v in row["delivery"].strip().split("-"))
                bid_price = float(row["bid"])
                ask_price = float(row["ask"])
            except (ValueError, AttributeError) as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
            if kind not in ("1M", "3M"):
                raise ConfigError(f"{path}:{lineno}: kind must be 1M or 3M")
            if not (0.0 <= bid_price <= 200.0 and 0.0 <= ask_price <= 200.0):
                raise ConfigError(f"{path}:{lineno}: price outside [0, 200]")
            bid_rate = price_to_rate(bid_price)
            ask_rate = price_to_rate(ask_price)
            if bid_rate > ask_rate:
                raise ConfigError(
                    f"{path}:{lineno}: bid rate {bid_rate:.6f} above ask rate {ask_rate:.6f}"
                )
            quotes.setdefault(date, []).append((kind, year, month, bid_rate, ask_rate))
    return quotes


def read_series_file(path):
    """Series rows: date plus named value columns; returns column -> [(date, value)]."""
    out: dict[str, list] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "date" not in reader.fieldnames:
            raise ConfigError(f"{path}: expected a 'date' column")
        cols = [c for c in reader.fieldnames if c != "date"]
        for lineno, row in enumerate(reader, 2):
            try:
                date = dt.date.fromisoformat(row["date"].strip())
            except (ValueError, AttributeError) as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
            for col in cols:
                raw = (row.get(col) or "").strip()
                if raw:
                    try:
                        out.setdefault(col, []).append((date, float(raw)))
                    except ValueError as exc:
                        raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return out


def quotes_to_period_quotes(rows, curve_date: dt.date, cutoff: int, warn=lambda msg: None):
    """Convert delivery-month quote rows to day-offset quotes, skipping
    contracts whose reference period has already started or ends past the
    cutoff."""
    out = []
    for kind, year, month, bid, ask in rows:
        if kind == "3M":
            start, end = three_month_reference_period(year, month)
        else:
            start, end = one_month_reference_period(year, month)
        t0 = day_offset(start, curve_date)
        t1 = day_offset(end, curve_date)
        if t0 < 0:
            warn(f"skipping {kind} {year}-{month:02d}: period already started")
            continue
        if t1 > cutoff:
            warn(f"skipping {kind} {year}-{month:02d}: beyond the {cutoff}-day cutoff")
            continue
        out.append(calibration.Quote(t0, t1, kind, bid, ask))
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_calibrate(args) -> int:
    cfg = load_config(args.config)
    basis = config_basis(cfg)
    cutoff = cfg.cutoff or int(basis.tenors[-1])
    curve_date = dt.date.fromisoformat(args.date)
    history = read_quote_file(args.quotes)
    if curve_date not in history:
        raise ConfigError(f"no quotes for {curve_date} in {args.quotes}")
    warn = lambda msg: print(f"warning: {msg}", file=sys.stderr)
    quotes = quotes_to_period_quotes(history[curve_date], curve_date, cutoff, warn)
    anchor = args.anchor_sofr
    system = calibration.build_system(quotes, basis, anchor_sofr=anchor, cutoff=cutoff)
    result = calibration.solve_mid(system) if args.mid else calibration.solve_bidask(system)

    out = _out_dir(args)
    coeff_path = out / "curve_coeffs.csv"
    with open(coeff_path, "w", encoding="utf-8") as fh:
        fh.write("k,tenor_day,coeff\n")
        for k, coeff in enumerate(result.coeffs, start=1):
            tenor = basis.tenors[k - 1]
            fh.write(f"{k},{tenor},{_fmt(coeff)}\n")
    curve = ForwardCurve(basis, result.coeffs, curve_date=curve_date, cutoff=cutoff)
    with open(out / "calibration_report.csv", "w", encoding="utf-8") as fh:
        fh.write("quote,kind,t0,t1,bid_rate,ask_rate,implied_rate,residual,log_linear_approx\n")
        for j, q in enumerate(quotes):
            implied = curve.implied_futures_rate(q.t0, q.t1)
            approx = int(j in system.taylor_rows)
            fh.write(
                f"{j},{q.kind},{q.t0},{q.t1},{_fmt(q.bid)},{_fmt(q.ask)},"
                f"{_fmt(implied)},{_fmt(result.residuals[j])},{approx}\n"
            )
    print(f"calibrated {len(quotes)} quotes -> {coeff_path} (objective {result.objective:.3e})")
    return 0


def _monthly_macro_series(series, warn):
    """Align floor/inflation/growth series on the common month-end grid."""
    needed = ("floor", "inflation", "growth")
    for name in needed:
        if name not in series:
            raise ConfigError(f"macro series file needs a {name!r} column")
    aligned = {}
    for name in needed:
        pts = sorted(series[name])
        gaps = [
            (b[0] - a[0]).days for a, b in zip(pts, pts[1:])
        ]
        if gaps and max(gaps) > 45:
            warn(f"{name}: sparse series interpolated to month-ends")
            pts = transforms.quarterly_to_monthly(pts)
        aligned[name] = dict(pts)
    dates = sorted(set(aligned["floor"]) & set(aligned["inflation"]) & set(aligned["growth"]))
    if len(dates) < 5:
        raise ConfigError("too few overlapping macro observations")
    return dates, aligned


def cmd_fit(args) -> int:
    cfg = load_config(args.config)
    basis = config_basis(cfg)
    shifts = config_shifts(cfg)
    cutoff = cfg.cutoff or int(basis.tenors[-1])
    warn = lambda msg: print(f"warning: {msg}", file=sys.stderr)

    daily = read_series_file(args.series)
    if "sofr" not in daily or "floor" not in daily:
        raise ConfigError("daily series file needs 'sofr' and 'floor' columns")
    sofr_by_date = dict(daily["sofr"])
    floor_by_date = dict(daily["floor"])

    history = read_quote_file(args.quotes)
    fit_dates = sorted(d for d in history if d in sofr_by_date and d in floor_by_date)
    if len(fit_dates) < 30:
        warn(f"only {len(fit_dates)} usable daily observations; estimates will be noisy")
    if not fit_dates:
        raise ConfigError("no quote dates overlap the daily series")

    backfill_input = []
    anchors = {}
    for date in fit_dates:
        quotes = quotes_to_period_quotes(history[date], date, cutoff, lambda m: None)
        if quotes:
            backfill_input.append((date, quotes))
            anchors[date] = sofr_by_date[date]
    results = calibration.daily_backfill(backfill_input, basis, anchors)

    factor_rows = []
    last_date = None
    for date, res in results:
        if isinstance(res, Exception):
            warn(f"{date}: calibration failed: {res}")
            continue
        try:
            factor_rows.append(transforms.to_factors(res.coeffs, floor_by_date[date], shifts))
        except FactorDomainError as exc:
            raise FactorDomainError(f"{date}: {exc}", index=exc.index, date=date) from exc
        last_date = date
        last_coeffs = res.coeffs
    if len(factor_rows) < basis.size + 2:
        raise ConfigError("too few calibrated days to fit the curve factor model")
    curve_model, curve_report = var.estimate(np.asarray(factor_rows), structure="diagonal")

    macro_series = read_series_file(args.macro)
    dates, aligned = _monthly_macro_series(macro_series, warn)
    macro_rows = []
    for date in dates:
        macro_rows.append(
            transforms.to_macro_factors(
                aligned["floor"][date],
                aligned["inflation"][date],
                aligned["growth"][date],
                shifts.floor_shift,
            )
        )
    macro_model, macro_report = var.estimate(
        np.asarray(macro_rows), structure="full", prune_p=cfg.prune_p
    )

    artifact = ModelArtifact(
        basis=basis,
        shifts=shifts,
        macro_model=macro_model,
        curve_model=curve_model,
        macro_state=np.asarray(macro_rows[-1]),
        curve_factors=np.asarray(factor_rows[-1]),
        curve_date=last_date,
        diagnostics={
            "n_curve_days": len(factor_rows),
            "n_macro_months": len(macro_rows),
            "curve_eigenvalues": [
                [z.real, z.imag] for z in np.atleast_1d(curve_report.eigenvalues)
            ],
            "macro_eigenvalues": [
                [z.real, z.imag] for z in np.atleast_1d(macro_report.eigenvalues)
            ],
            "macro_pruned": macro_report.pruned.tolist(),
            "notes": list(curve_report.notes + macro_report.notes),
        },
    )
    save_artifact(artifact, args.out)

    report_path = Path(args.out).with_suffix(".report.json")
    import json

    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "curve": _report_json(curve_report),
                "macro": _report_json(macro_report),
                "initial_coeffs": last_coeffs.tolist(),
            },
            fh,
            indent=1,
        )
    print(f"fitted models -> {args.out} (report {report_path})")
    return 0


def _report_json(report: var.EstimationReport) -> dict:
    def clean(mat):
        return [[None if np.isnan(v) else v for v in row] for row in np.asarray(mat)]

    return {
        "coeffs": report.coeffs.tolist(),
        "intercept": report.intercept.tolist(),
        "std_errors": clean(report.std_errors),
        "p_values": clean(report.p_values),
        "pruned": report.pruned.tolist(),
        "eigenvalues": [[z.real, z.imag] for z in np.atleast_1d(report.eigenvalues)],
        "notes": list(report.notes),
    }


def _steered_models(artifact: ModelArtifact, cfg: AppConfig, n_months: int, n_days: int):
    """Replace constant drifts by median-steered schedules from config targets."""
    shifts = artifact.shifts
    floor_m, infl_m, growth_m = cfg.macro_medians
    macro_asym = transforms.to_macro_factors(floor_m, infl_m, growth_m, shifts.floor_shift)
    points = []
    if cfg.track_curve_months > 0:
        curve0 = ForwardCurve(
            artifact.basis,
            artifact.initial_coeffs(),
            cutoff=max(int(artifact.basis.tenors[-1]), n_days),
        )
        hist_x1 = float(artifact.curve_factors[0])
        months = min(cfg.track_curve_months, n_months)
        offsets = [cfg.month_step * (m + 1) for m in range(months)]
        points = var.floor_targets_tracking_curve(curve0, hist_x1, shifts, offsets, months)
    macro_targets = var.MedianTargets(points=tuple(points), asymptote=macro_asym)
    macro_drift, _ = var.median_path_drift(
        artifact.macro_model, macro_targets, artifact.macro_state, n_months,
        relax_window=cfg.relax_window_macro,
    )

    coeff_asym = np.asarray(cfg.coeff_medians, dtype=float)
    if coeff_asym.size != artifact.basis.size:
        raise ConfigError("coefficient medians do not match the basis size")
    curve_asym = transforms.to_factors(coeff_asym, floor_m, shifts)
    curve_targets = var.MedianTargets(asymptote=curve_asym)
    curve_drift, _ = var.median_path_drift(
        artifact.curve_model, curve_targets, artifact.curve_factors, n_days,
        relax_window=cfg.relax_window_curve,
    )
    return (
        artifact.macro_model.with_drift(macro_drift),
        artifact.curve_model.with_drift(curve_drift),
    )


def _sim_config(cfg: AppConfig, args, meeting_offsets=None) -> simulation.SimulationConfig:
    horizon = args.horizon_days or cfg.horizon_days
    return simulation.SimulationConfig(
        n_scenarios=args.scenarios or cfg.scenarios,
        horizon_days=horizon,
        monthly_offsets=simulation.monthly_grid(horizon, cfg.month_step),
        meeting_offsets=meeting_offsets,
        seed=cfg.seed if args.seed is None else args.seed,
        antithetic=cfg.antithetic,
        record_xi=cfg.record_xi,
        record_sofr=cfg.record_sofr,
        floor_round=cfg.floor_round or None,
        chunk_size=cfg.chunk_size,
    )


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    artifact = load_artifact(args.model)
    meeting_offsets = None
    if args.fomc:
        if artifact.curve_date is None:
            raise ConfigError("FOMC schedule needs a curve date in the model artifact")
        dates = read_date_file(args.fomc)
        offs = sorted(
            day_offset(d, artifact.curve_date)
            for d in dates
            if day_offset(d, artifact.curve_date) >= 1
        )
        meeting_offsets = tuple(o for o in offs if o <= (args.horizon_days or cfg.horizon_days))
    sim_cfg = _sim_config(cfg, args, meeting_offsets)
    macro_model, curve_model = _steered_models(
        artifact, cfg, len(sim_cfg.monthly_offsets), sim_cfg.horizon_days
    )
    out = _out_dir(args)
    scen_path = out / "scenarios.bin"
    sset = simulation.simulate_to_file(
        macro_model,
        curve_model,
        artifact.shifts,
        artifact.basis,
        (artifact.macro_state, artifact.curve_factors),
        sim_cfg,
        scen_path,
        threads=args.threads,
    )
    variables = ["floor", "inflation", "growth"]
    if sim_cfg.record_sofr:
        variables.append("sofr")
    if sim_cfg.record_xi:
        variables.extend(f"coeff{k + 1}" for k in range(artifact.basis.size))
    if sim_cfg.n_scenarios >= 100:
        with open(out / "bands.csv", "w", encoding="utf-8") as fh:
            fh.write("variable,day,median,lo50,hi50,lo95,hi95\n")
            for name in variables:
                bands = simulation.quantile_bands(sset, name, levels=(0.5, 0.95))
                for j, day in enumerate(bands.offsets):
                    fh.write(
                        f"{name},{int(day)},{_fmt(bands.median[j])},"
                        f"{_fmt(bands.lower(0.5)[j])},{_fmt(bands.upper(0.5)[j])},"
                        f"{_fmt(bands.lower(0.95)[j])},{_fmt(bands.upper(0.95)[j])}\n"
                    )
    else:
        print("warning: fewer than 100 scenarios, skipping quantile bands", file=sys.stderr)
    extract_vars = [v for v in ("sofr", "floor") if v in variables]
    with open(out / "scenario0.csv", "w", encoding="utf-8") as fh:
        fh.write("day,variable,value\n")
        for name in extract_vars:
            values, offsets = simulation._variable_matrix(sset, name)
            for j, day in enumerate(offsets):
                fh.write(f"{int(day)},{name},{_fmt(values[0, j])}\n")
    print(f"simulated {sim_cfg.n_scenarios} scenarios -> {scen_path}")
    return 0


def read_derivative_specs(path):
    """Instrument rows: label, kind, then kind-specific numeric fields."""
    specs = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "kind" not in reader.fieldnames:
            raise ConfigError(f"{path}: expected a 'kind' column")
        for lineno, row in enumerate(reader, 2):
            def get(name, cast=float):
                raw = (row.get(name) or "").strip()
                return cast(raw) if raw else None

            try:
                kind = row["kind"].strip()
                payments = (row.get("payments") or "").strip()
                spec = pricing.DerivativeSpec(
                    kind=kind,
                    t0=get("t0", int),
                    t1=get("t1", int),
                    t2=get("t2", int),
                    maturity=get("maturity", int),
                    strike=get("strike"),
                    traded_rate=get("traded_rate"),
                    payment_offsets=tuple(int(v) for v in payments.split(";") if v)
                    if payments
                    else (),
                    multiplier=get("multiplier") or (
                        1.0 if kind == "swaption" else pricing.FUTURES_MULTIPLIER
                    ),
                    label=(row.get("label") or f"row{lineno}").strip(),
                )
            except (ValueError, KeyError) as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
            specs.append(spec)
    if not specs:
        raise ConfigError(f"{path}: no instruments")
    return specs


def cmd_price(args) -> int:
    cfg = load_config(args.config)
    artifact = load_artifact(args.model)
    sset = simulation.load_binary(args.scenarios, artifact.basis, artifact.shifts)
    specs = read_derivative_specs(args.spec)
    out = _out_dir(args)
    rho_grid = cfg.rho_grid
    wealth_grid = cfg.wealth_grid
    with open(out / "prices.csv", "w", encoding="utf-8") as fh:
        fh.write("label,kind,rho,rho_x_1e3,wealth,alpha,stderr,n\n")
        for spec in specs:
            cash = pricing.payouts(spec, sset)
            roll = pricing.rollover_factors(sset, 0, spec.settlement_day)
            hist, edges = np.histogram(cash, bins=100)
            with open(out / f"payout_hist_{spec.label}.csv", "w", encoding="utf-8") as hh:
                hh.write("bin_lo,bin_hi,count,density\n")
                width = edges[1] - edges[0] if edges.size > 1 else 1.0
                total = cash.size
                for c, lo_e, hi_e in zip(hist, edges[:-1], edges[1:]):
                    hh.write(f"{_fmt(lo_e)},{_fmt(hi_e)},{c},{_fmt(c / (total * width))}\n")
            for rho in rho_grid:
                if spec.pricing_convention == "pay-at-spot":
                    est = pricing.indifference_price_spot(cash, roll, rho)
                    fh.write(
                        f"{spec.label},{spec.kind},{_fmt(rho)},{_fmt(rho * 1e3)},,"
                        f"{_fmt(est.alpha)},{_fmt(est.stderr)},{est.n_scenarios}\n"
                    )
                else:
                    for wealth in wealth_grid:
                        est = pricing.indifference_price_maturity(cash, roll, rho, wealth)
                        fh.write(
                            f"{spec.label},{spec.kind},{_fmt(rho)},{_fmt(rho * 1e3)},{_fmt(wealth)},"
                            f"{_fmt(est.alpha)},{_fmt(est.stderr)},{est.n_scenarios}\n"
                        )
    print(f"priced {len(specs)} instruments -> {out / 'prices.csv'}")
    return 0


def _parse_periods(raw: str):
    out = []
    for tok in raw.split(","):
        a, _, b = tok.partition(":")
        out.append((int(a), int(b)))
    return out


def cmd_check_arb(args) -> int:
    cfg = load_config(args.config)
    artifact = load_artifact(args.model)
    horizon = max(args.day + 2, 40)
    meetings = simulation.monthly_grid(horizon, cfg.month_step)
    eps = args.eps if args.eps is not None else cfg.hull_eps
    n_samples = args.samples or cfg.hull_samples
    out = _out_dir(args)
    rows = []
    if args.kind in ("futures", "both"):
        if args.periods:
            periods = _parse_periods(args.periods)
        else:
            first = args.day + 30
            periods = [(first + 91 * j, first + 91 * (j + 1)) for j in range(4)]
        verdict = arbitrage.check_futures_noarb(
            artifact.macro_model,
            artifact.curve_model,
            artifact.shifts,
            artifact.basis,
            artifact.macro_state,
            artifact.curve_factors,
            periods,
            day=args.day,
            eps=eps,
            n_samples=n_samples,
            seed=cfg.seed if args.seed is None else args.seed,
            meeting_offsets=meetings,
        )
        rows.append(("futures", verdict))
    if args.kind in ("zcb", "both"):
        verdict = arbitrage.check_zcb_noarb(
            artifact.macro_model,
            artifact.curve_model,
            artifact.shifts,
            artifact.basis,
            artifact.macro_state,
            artifact.curve_factors,
            horizon=args.zcb_horizon,
            day=args.day,
            eps=eps,
            n_samples=n_samples,
            seed=cfg.seed if args.seed is None else args.seed,
            meeting_offsets=meetings,
        )
        rows.append(("zcb", verdict))
    with open(out / "arbitrage_verdicts.csv", "w", encoding="utf-8") as fh:
        fh.write("day,check,status,margin,samples,eps\n")
        for kind, verdict in rows:
            fh.write(
                f"{args.day},{kind},{verdict.status},{_fmt(verdict.margin)},"
                f"{verdict.n_samples},{_fmt(eps)}\n"
            )
    for kind, verdict in rows:
        print(f"{kind}: {verdict.status} (margin {verdict.margin:.3e}, M={verdict.n_samples})")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sofrsim",
        description="SOFR forward curve calibration, simulation and pricing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="key = value config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out-dir", default="out")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("calibrate", help="fit a forward curve to one day's quotes")
    common(p)
    p.add_argument("--quotes", required=True)
    p.add_argument("--date", required=True)
    p.add_argument("--mid", action="store_true", help="least squares on mid quotes")
    p.add_argument("--anchor-sofr", type=float, default=None)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("fit", help="estimate macro and curve factor models")
    common(p)
    p.add_argument("--quotes", required=True, help="multi-date quote history CSV")
    p.add_argument("--series", required=True, help="daily CSV: date,sofr,floor")
    p.add_argument("--macro", required=True, help="monthly CSV: date,floor,inflation,growth")
    p.add_argument("--out", default="model.json")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="simulate scenarios from a model artifact")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--scenarios", type=int, default=None)
    p.add_argument("--horizon-days", type=int, default=None)
    p.add_argument("--fomc", default=None, help="meeting schedule file (ISO dates)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("price", help="indifference prices from scenario files")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--scenarios", required=True, help="scenario .bin file")
    p.add_argument("--spec", required=True, help="instrument CSV")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("check-arb", help="sampled no-arbitrage verdicts")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--day", type=int, default=0)
    p.add_argument("--kind", choices=("futures", "zcb", "both"), default="futures")
    p.add_argument("--periods", default=None, help="comma list of t0:t1 day offsets")
    p.add_argument("--zcb-horizon", type=int, default=5)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.set_defaults(func=cmd_check_arb)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_PARSE
    except (HorizonTooShortError, DimensionTooLargeError, TooFewScenariosError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_LIMITS
    except NumericalFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_NUMERIC
    except SofrSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
