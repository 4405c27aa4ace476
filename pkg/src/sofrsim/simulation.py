"""Joint Monte Carlo simulation of monthly macro factors and daily curve
factors, with antithetic sampling, quantile summaries, and scenario-file IO.

Reproducibility contract: every scenario (or antithetic pair) draws from its
own counter-based Philox stream keyed by (seed, index), so results are
bit-identical across runs, chunk sizes and thread counts.  Normals come from
the inverse normal CDF applied to the stream's uniforms.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtri

from . import _kernels
from .curve import BasisFamily, ForwardCurve
from .dates import DAY_FRACTION
from .errors import (
    ConfigError,
    HorizonTooShortError,
    TooFewScenariosError,
    UnstableModelError,
)
from .transforms import ShiftConfig, from_factors
from .var import VarModel, spectral_radius

_MAGIC = b"SOFRSCN1"
_VERSION = 1
_FLAG_SOFR = 1
_FLAG_XI = 2
_FLAG_ANTITHETIC = 4
_HEADER = struct.Struct("<8sII6Q")  # magic, version, flags, n, n_days, k, n_monthly, n_meetings, seed
_MIN_UNIFORM = 2.0**-64


@dataclass(frozen=True)
class SimulationConfig:
    n_scenarios: int
    horizon_days: int
    monthly_offsets: tuple[int, ...]
    meeting_offsets: tuple[int, ...] | None = None
    seed: int = 0
    antithetic: bool = True
    record_xi: bool = True
    record_sofr: bool = True
    xi_snapshot_days: tuple[int, ...] = ()
    floor_round: float | None = None
    chunk_size: int = 512
    allow_unstable: bool = False

    def __post_init__(self):
        if self.n_scenarios < 1:
            raise ConfigError("need at least one scenario")
        if self.antithetic and self.n_scenarios % 2:
            raise ConfigError("antithetic sampling needs an even scenario count")
        off = tuple(int(o) for o in self.monthly_offsets)
        if not off or any(b <= a for a, b in zip(off, off[1:])) or off[0] < 1:
            raise ConfigError("monthly offsets must be strictly increasing and >= 1")
        if off[-1] > self.horizon_days:
            raise ConfigError("monthly offsets exceed the horizon")
        object.__setattr__(self, "monthly_offsets", off)
        if self.meeting_offsets is not None:
            moff = tuple(int(o) for o in self.meeting_offsets)
            if not moff or any(b <= a for a, b in zip(moff, moff[1:])) or moff[0] < 1:
                raise ConfigError("meeting offsets must be strictly increasing and >= 1")
            if moff[-1] > self.horizon_days:
                raise ConfigError("meeting offsets exceed the horizon")
            object.__setattr__(self, "meeting_offsets", moff)
        snaps = tuple(sorted(set(int(s) for s in self.xi_snapshot_days)))
        if snaps and (snaps[0] < 0 or snaps[-1] > self.horizon_days):
            raise ConfigError("snapshot days outside the horizon")
        object.__setattr__(self, "xi_snapshot_days", snaps)
        if self.chunk_size < 2 or self.chunk_size % 2:
            object.__setattr__(self, "chunk_size", max(2, self.chunk_size + self.chunk_size % 2))

    @property
    def meetings(self) -> tuple[int, ...]:
        return self.meeting_offsets if self.meeting_offsets is not None else self.monthly_offsets


def monthly_grid(horizon_days: int, step: int = 30) -> tuple[int, ...]:
    """Evenly spaced month-grid offsets up to the horizon."""
    return tuple(range(step, horizon_days + 1, step))


@dataclass
class ScenarioSet:
    """Simulated paths plus the configuration echo needed to reproduce them."""

    config: SimulationConfig
    basis: BasisFamily
    shifts: ShiftConfig
    macro: np.ndarray  # (N, n_monthly + 1, 3)
    floor_meeting: np.ndarray  # (N, n_meetings + 1)
    sofr: np.ndarray | None  # (N, horizon_days + 1)
    xi: np.ndarray | None  # (N, horizon_days + 1, K)
    xi_snapshots: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def n_scenarios(self) -> int:
        return self.macro.shape[0]

    @property
    def horizon_days(self) -> int:
        return self.config.horizon_days

    def meeting_index(self) -> np.ndarray:
        """meeting_index[t] = column of floor_meeting in force on day t."""
        meetings = np.asarray(self.config.meetings)
        return np.searchsorted(meetings, np.arange(self.horizon_days + 1), side="right")

    def daily_floor(self, scenarios=slice(None)) -> np.ndarray:
        """Policy floor expanded to the daily grid (constant between meetings)."""
        return self.floor_meeting[scenarios][:, self.meeting_index()]

    def curve_snapshot(self, day: int) -> np.ndarray:
        """(N, K) coefficients of the curve observed on *day*."""
        if day in self.xi_snapshots:
            return self.xi_snapshots[day]
        if self.xi is not None and 0 <= day <= self.horizon_days:
            return self.xi[:, day, :]
        raise HorizonTooShortError(f"no curve snapshot recorded for day {day}")

    def curve_at(self, scenario: int, day: int, cutoff: int | None = None) -> ForwardCurve:
        return ForwardCurve(self.basis, self.curve_snapshot(day)[scenario], cutoff=cutoff)


def _pair_streams(seed: int, antithetic: bool, lo: int, hi: int, n_draws: int) -> np.ndarray:
    """Normal draws for scenarios [lo, hi); antithetic pairs share a stream."""
    out = np.empty((hi - lo, n_draws))
    if antithetic:
        first_pair, last_pair = lo // 2, (hi + 1) // 2
        for pair in range(first_pair, last_pair):
            gen = np.random.Generator(np.random.Philox(key=np.array([seed, pair], dtype=np.uint64)))
            u = gen.random(n_draws)
            z = ndtri(np.maximum(u, _MIN_UNIFORM))
            even, odd = 2 * pair, 2 * pair + 1
            if lo <= even < hi:
                out[even - lo] = z
            if lo <= odd < hi:
                out[odd - lo] = -z
    else:
        for idx in range(lo, hi):
            gen = np.random.Generator(np.random.Philox(key=np.array([seed, idx], dtype=np.uint64)))
            u = gen.random(n_draws)
            out[idx - lo] = ndtri(np.maximum(u, _MIN_UNIFORM))
    return out


def simulate(
    macro_model: VarModel,
    curve_model: VarModel,
    shifts: ShiftConfig,
    basis: BasisFamily,
    init: tuple[np.ndarray, np.ndarray],
    cfg: SimulationConfig,
    threads: int = 1,
) -> ScenarioSet:
    """Simulate joint macro / curve scenarios.

    *init* is (macro_state, curve_factors) at day 0.  Monthly macro steps run
    on ``cfg.monthly_offsets``; the policy floor exposed to the daily layer is
    a step function updating only on ``cfg.meetings`` (it samples the latest
    monthly macro state at each meeting).  Daily curve factors step on every
    calendar day and map to coefficients and the overnight rate.
    """
    sset = _allocate(macro_model, curve_model, shifts, basis, cfg)
    _run(sset, macro_model, curve_model, init, cfg, threads)
    return sset


def _allocate(macro_model, curve_model, shifts, basis, cfg) -> ScenarioSet:
    n = cfg.n_scenarios
    n_monthly = len(cfg.monthly_offsets)
    n_meet = len(cfg.meetings)
    days = cfg.horizon_days + 1
    k = basis.size
    macro = np.empty((n, n_monthly + 1, macro_model.dim))
    floor_meet = np.empty((n, n_meet + 1))
    sofr = np.empty((n, days)) if cfg.record_sofr else None
    xi = np.empty((n, days, k)) if cfg.record_xi else None
    snaps = {d: np.empty((n, k)) for d in cfg.xi_snapshot_days}
    return ScenarioSet(cfg, basis, shifts, macro, floor_meet, sofr, xi, snaps)


def _run(sset: ScenarioSet, macro_model, curve_model, init, cfg, threads):
    if not cfg.allow_unstable:
        for name, model in (("macro", macro_model), ("curve", curve_model)):
            rho = spectral_radius(model)
            if rho >= 1.0:
                raise UnstableModelError(
                    f"{name} model has spectral radius {rho:.6f} >= 1"
                )
    macro0 = np.asarray(init[0], dtype=float)
    factors0 = np.asarray(init[1], dtype=float)
    k = sset.basis.size
    if factors0.shape != (k,) or macro0.shape != (macro_model.dim,):
        raise ConfigError("initial state dimensions do not match the models")

    n = cfg.n_scenarios
    d_macro = macro_model.dim
    n_monthly = len(cfg.monthly_offsets)
    n_steps = cfg.horizon_days
    meetings = np.asarray(cfg.meetings)
    # meeting -> latest monthly step at or before it (0 = initial state)
    meet_to_month = np.searchsorted(np.asarray(cfg.monthly_offsets), meetings, side="right")
    meet_idx = np.searchsorted(meetings, np.arange(n_steps + 1), side="right").astype(np.int64)

    macro_drift = np.ascontiguousarray(macro_model.drift_schedule(n_monthly))
    curve_drift = np.ascontiguousarray(curve_model.drift_schedule(n_steps))
    macro_amat = np.ascontiguousarray(macro_model.amat)
    curve_amat = np.ascontiguousarray(curve_model.amat)
    macro_chol = np.ascontiguousarray(macro_model.chol)
    curve_chol = np.ascontiguousarray(curve_model.chol)
    shift_arr = sset.shifts.shifts_array()
    w0 = np.ascontiguousarray(sset.basis.values(0.0)[0])
    floor_shift = sset.shifts.floor_shift

    snap_slot = np.full(n_steps + 1, -1, dtype=np.int64)
    snap_days = list(cfg.xi_snapshot_days)
    for slot, day in enumerate(snap_days):
        snap_slot[day] = slot

    n_macro_draws = n_monthly * d_macro
    # the daily layer is skipped entirely when nothing observes it
    daily_needed = cfg.record_xi or cfg.record_sofr or bool(snap_days)
    n_daily_draws = n_steps * k if daily_needed else 0

    dummy_xi = np.empty((0, 0, 0))
    dummy_sofr = np.empty((0, 0))

    def worker(lo: int, hi: int):
        m = hi - lo
        z = _pair_streams(cfg.seed, cfg.antithetic, lo, hi, n_macro_draws + n_daily_draws)
        z_macro = np.ascontiguousarray(z[:, :n_macro_draws].reshape(m, n_monthly, d_macro))
        if daily_needed:
            z_daily = np.ascontiguousarray(z[:, n_macro_draws:].reshape(m, n_steps, k))
        del z

        macro_slice = sset.macro[lo:hi]
        _kernels.var_paths(
            np.ascontiguousarray(np.broadcast_to(macro0, (m, d_macro))),
            macro_amat,
            macro_drift,
            macro_chol,
            z_macro,
            macro_slice,
        )
        floor_slice = sset.floor_meeting[lo:hi]
        floor_slice[:, 0] = math.exp(macro0[0]) - floor_shift
        floor_slice[:, 1:] = np.exp(macro_slice[:, meet_to_month, 0]) - floor_shift
        if cfg.floor_round:
            inc = cfg.floor_round
            floor_slice[:, 1:] = np.round(floor_slice[:, 1:] / inc) * inc
        if not daily_needed:
            return

        xi_slice = sset.xi[lo:hi] if sset.xi is not None else dummy_xi
        sofr_slice = sset.sofr[lo:hi] if sset.sofr is not None else dummy_sofr
        snap_out = (
            np.empty((len(snap_days), m, k)) if snap_days else np.empty((0, m, k))
        )
        _kernels.curve_paths(
            np.ascontiguousarray(np.broadcast_to(factors0, (m, k))),
            curve_amat,
            curve_drift,
            curve_chol,
            z_daily,
            np.ascontiguousarray(floor_slice),
            meet_idx,
            shift_arr,
            w0,
            DAY_FRACTION,
            xi_slice,
            sofr_slice,
            snap_slot,
            snap_out,
        )
        for slot, day in enumerate(snap_days):
            sset.xi_snapshots[day][lo:hi] = snap_out[slot]

    bounds = []
    start = 0
    while start < n:
        bounds.append((start, min(start + cfg.chunk_size, n)))
        start += cfg.chunk_size
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: worker(*b), bounds))
    else:
        for lo, hi in bounds:
            worker(lo, hi)


# ---------------------------------------------------------------------------
# quantile summaries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuantileBands:
    variable: str
    offsets: np.ndarray
    median: np.ndarray
    bands: dict[float, tuple[np.ndarray, np.ndarray]]

    def lower(self, level: float) -> np.ndarray:
        return self.bands[level][0]

    def upper(self, level: float) -> np.ndarray:
        return self.bands[level][1]


def _variable_matrix(sset: ScenarioSet, variable: str):
    """(values matrix (N, T), day offsets) for a named variable."""
    if variable == "sofr":
        if sset.sofr is None:
            raise HorizonTooShortError("sofr paths were not recorded")
        return sset.sofr, np.arange(sset.horizon_days + 1)
    if variable == "floor":
        meetings = np.concatenate([[0], np.asarray(sset.config.meetings)])
        return sset.floor_meeting, meetings
    if variable in ("inflation", "growth"):
        col = 1 if variable == "inflation" else 2
        offs = np.concatenate([[0], np.asarray(sset.config.monthly_offsets)])
        return sset.macro[:, :, col], offs
    if variable.startswith("coeff"):
        k = int(variable[5:]) - 1
        if sset.xi is None:
            raise HorizonTooShortError("coefficient paths were not recorded")
        if not 0 <= k < sset.basis.size:
            raise ConfigError(f"no coefficient {k + 1}")
        return sset.xi[:, :, k], np.arange(sset.horizon_days + 1)
    raise ConfigError(f"unknown variable {variable!r}")


def quantile_bands(sset: ScenarioSet, variable: str, levels=(0.95,)) -> QuantileBands:
    """Pointwise empirical median and symmetric confidence bands."""
    if sset.n_scenarios < 100:
        raise TooFewScenariosError("need at least 100 scenarios for bands")
    values, offsets = _variable_matrix(sset, variable)
    t = values.shape[1]
    median = np.empty(t)
    bands = {lvl: (np.empty(t), np.empty(t)) for lvl in levels}
    for j in range(t):  # per-date to keep memory flat for memmapped inputs
        col = np.asarray(values[:, j])
        median[j] = np.quantile(col, 0.5)
        for lvl in levels:
            lo, hi = bands[lvl]
            lo[j] = np.quantile(col, 0.5 - lvl / 2)
            hi[j] = np.quantile(col, 0.5 + lvl / 2)
    return QuantileBands(variable, offsets, median, bands)


# ---------------------------------------------------------------------------
# jump diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JumpDiagnostics:
    ok: bool
    max_offgrid_innovation: float  # in units of the factor-1 innovation std
    threshold: float
    floor_steps_offgrid: int
    meeting_jumps: int


def jump_diagnostics(
    sset: ScenarioSet,
    curve_model: VarModel,
    n_sigma: float = 8.0,
) -> JumpDiagnostics:
    """Verify that overnight-rate discontinuities only occur at meetings.

    The short-end factor is reconstructed exactly from the simulated
    overnight rate and floor path; off-meeting days must show innovations
    within *n_sigma* standard deviations of the factor-1 innovation.
    """
    if sset.sofr is None:
        raise HorizonTooShortError("sofr paths were not recorded")
    sigma1 = math.sqrt(curve_model.sigma[0, 0])
    c1 = sset.shifts.curve_shifts[0]
    a11 = curve_model.amat[0, 0]
    drift = curve_model.drift_schedule(sset.horizon_days)[:, 0]
    floor_daily = sset.daily_floor()
    coeff1 = np.log1p(sset.sofr * DAY_FRACTION) / DAY_FRACTION
    x1 = np.log(coeff1 + c1 - floor_daily)
    innov = x1[:, 1:] - x1[:, :-1] - a11 * x1[:, :-1] - drift[None, :]

    meetings = np.asarray(sset.config.meetings)
    is_meeting = np.zeros(sset.horizon_days + 1, dtype=bool)
    is_meeting[meetings] = True
    offgrid = ~is_meeting[1:]

    max_innov = float(np.abs(innov[:, offgrid]).max() / sigma1) if sigma1 > 0 else 0.0
    floor_diff = np.diff(floor_daily, axis=1)
    offgrid_floor = int(np.count_nonzero(floor_diff[:, offgrid]))
    meeting_jumps = int(np.count_nonzero(floor_diff[:, ~offgrid]))
    ok = max_innov <= n_sigma and offgrid_floor == 0
    return JumpDiagnostics(ok, max_innov, n_sigma, offgrid_floor, meeting_jumps)


# ---------------------------------------------------------------------------
# scenario file formats
# ---------------------------------------------------------------------------


def _flags(cfg: SimulationConfig) -> int:
    flags = 0
    if cfg.record_sofr:
        flags |= _FLAG_SOFR
    if cfg.record_xi:
        flags |= _FLAG_XI
    if cfg.antithetic:
        flags |= _FLAG_ANTITHETIC
    return flags


def _layout(n, n_days, k, n_monthly, n_meetings, flags, d_macro=3):
    """(name, offset, shape) table of the binary layout."""
    pos = _HEADER.size
    entries = []

    def add(name, shape, dtype_size=8):
        nonlocal pos
        entries.append((name, pos, shape))
        pos += int(np.prod(shape)) * dtype_size

    add("monthly_offsets", (n_monthly,))
    add("meeting_offsets", (n_meetings,))
    add("macro", (n, n_monthly + 1, d_macro))
    add("floor", (n, n_meetings + 1))
    if flags & _FLAG_SOFR:
        add("sofr", (n, n_days))
    if flags & _FLAG_XI:
        add("xi", (n, n_days, k))
    return entries, pos


def save_binary(sset: ScenarioSet, path) -> None:
    """Write the documented little-endian binary scenario layout."""
    cfg = sset.config
    flags = _flags(cfg)
    n = sset.n_scenarios
    n_days = cfg.horizon_days + 1
    k = sset.basis.size
    n_monthly = len(cfg.monthly_offsets)
    n_meet = len(cfg.meetings)
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(_MAGIC, _VERSION, flags, n, n_days, k, n_monthly, n_meet, cfg.seed)
        )
        np.asarray(cfg.monthly_offsets, dtype="<i8").tofile(fh)
        np.asarray(cfg.meetings, dtype="<i8").tofile(fh)
        np.ascontiguousarray(sset.macro, dtype="<f8").tofile(fh)
        np.ascontiguousarray(sset.floor_meeting, dtype="<f8").tofile(fh)
        if flags & _FLAG_SOFR:
            np.ascontiguousarray(sset.sofr, dtype="<f8").tofile(fh)
        if flags & _FLAG_XI:
            np.ascontiguousarray(sset.xi, dtype="<f8").tofile(fh)


def load_binary(path, basis: BasisFamily, shifts: ShiftConfig, mmap: bool = True) -> ScenarioSet:
    """Load a scenario file written by :func:`save_binary`.

    The basis and shift configuration are not stored in the file and must be
    supplied by the caller (they live in the model artifact).
    """
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
    magic, version, flags, n, n_days, k, n_monthly, n_meet, seed = _HEADER.unpack(header)
    if magic != _MAGIC:
        raise ConfigError(f"{path}: not a scenario file")
    if version != _VERSION:
        raise ConfigError(f"{path}: unsupported version {version}")
    if k != basis.size:
        raise ConfigError(f"{path}: file has {k} coefficients, basis has {basis.size}")
    entries, total = _layout(n, n_days, k, n_monthly, n_meet, flags)
    table = {}
    mode = "r" if mmap else None
    for name, offset, shape in entries:
        if name in ("monthly_offsets", "meeting_offsets"):
            arr = np.fromfile(path, dtype="<i8", count=int(np.prod(shape)), offset=offset)
            table[name] = arr.reshape(shape)
        elif mmap:
            table[name] = np.memmap(path, dtype="<f8", mode="r", offset=offset, shape=shape)
        else:
            arr = np.fromfile(path, dtype="<f8", count=int(np.prod(shape)), offset=offset)
            table[name] = arr.reshape(shape)
    cfg = SimulationConfig(
        n_scenarios=n,
        horizon_days=n_days - 1,
        monthly_offsets=tuple(int(o) for o in table["monthly_offsets"]),
        meeting_offsets=tuple(int(o) for o in table["meeting_offsets"]),
        seed=seed,
        antithetic=bool(flags & _FLAG_ANTITHETIC),
        record_xi=bool(flags & _FLAG_XI),
        record_sofr=bool(flags & _FLAG_SOFR),
    )
    return ScenarioSet(
        config=cfg,
        basis=basis,
        shifts=shifts,
        macro=table["macro"],
        floor_meeting=table["floor"],
        sofr=table.get("sofr"),
        xi=table.get("xi"),
    )


def simulate_to_file(
    macro_model: VarModel,
    curve_model: VarModel,
    shifts: ShiftConfig,
    basis: BasisFamily,
    init,
    cfg: SimulationConfig,
    path,
    threads: int = 1,
) -> ScenarioSet:
    """Stream the simulation into the binary layout, then memory-map it.

    Scales to scenario sets that do not fit in memory; output bytes are
    deterministic given (models, init, config) regardless of thread count.
    """
    flags = _flags(cfg)
    n = cfg.n_scenarios
    n_days = cfg.horizon_days + 1
    k = basis.size
    n_monthly = len(cfg.monthly_offsets)
    n_meet = len(cfg.meetings)
    entries, total = _layout(n, n_days, k, n_monthly, n_meet, flags)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, flags, n, n_days, k, n_monthly, n_meet, cfg.seed))
        fh.truncate(total)
        fh.seek(_HEADER.size)
        np.asarray(cfg.monthly_offsets, dtype="<i8").tofile(fh)
        np.asarray(cfg.meetings, dtype="<i8").tofile(fh)
    views = {}
    for name, offset, shape in entries:
        if name in ("monthly_offsets", "meeting_offsets"):
            continue
        views[name] = np.memmap(path, dtype="<f8", mode="r+", offset=offset, shape=shape)
    sset = ScenarioSet(
        config=cfg,
        basis=basis,
        shifts=shifts,
        macro=views["macro"],
        floor_meeting=views["floor"],
        sofr=views.get("sofr"),
        xi=views.get("xi"),
        xi_snapshots={d: np.empty((n, k)) for d in cfg.xi_snapshot_days},
    )
    _run(sset, macro_model, curve_model, init, cfg, threads)
    for view in views.values():
        view.flush()
    return load_binary(path, basis, shifts)


def export_csv(sset: ScenarioSet, path, variables=("sofr",)) -> None:
    """Columnar (scenario, day, variable, value) export."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("scenario,day,variable,value\n")
        for variable in variables:
            values, offsets = _variable_matrix(sset, variable)
            for i in range(values.shape[0]):
                row = values[i]
                for j, day in enumerate(offsets):
                    fh.write(f"{i},{int(day)},{variable},{float(row[j])!r}\n")
