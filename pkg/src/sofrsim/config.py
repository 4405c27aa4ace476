"""Application configuration: baked-in defaults plus a plain-text override
file with dotted keys (``section.key = value``, '#' comments, lists comma
separated).  The full schema is documented in the README."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

#: tenor grid of the default piecewise-linear basis (days)
DEFAULT_TENORS = (0, 30, 90, 180, 365, 730, 1095, 1460, 1825)

#: long-run medians: policy floor (decimal), inflation and GDP growth (points)
DEFAULT_MACRO_MEDIANS = (0.025, 2.0, 2.85)

#: long-run medians of the curve coefficients (decimal)
DEFAULT_COEFF_MEDIANS = (0.026, 0.017, 0.016, 0.015, 0.014, 0.014, 0.015, 0.016, 0.012)

from .transforms import DEFAULT_CURVE_SHIFTS, DEFAULT_FLOOR_SHIFT  # noqa: E402


@dataclass(frozen=True)
class AppConfig:
    basis_kind: str = "linear"
    tenors: tuple[int, ...] = DEFAULT_TENORS
    cutoff: int = 0  # 0 -> last tenor
    curve_shifts: tuple[float, ...] = DEFAULT_CURVE_SHIFTS
    floor_shift: float = DEFAULT_FLOOR_SHIFT
    macro_medians: tuple[float, float, float] = DEFAULT_MACRO_MEDIANS
    coeff_medians: tuple[float, ...] = DEFAULT_COEFF_MEDIANS
    relax_window_macro: int = 12
    relax_window_curve: int = 360
    track_curve_months: int = 0
    prune_p: float = 0.10
    scenarios: int = 1000
    horizon_days: int = 3650
    month_step: int = 30
    seed: int = 0
    antithetic: bool = True
    record_xi: bool = True
    record_sofr: bool = True
    floor_round: float = 0.0  # 0 -> off
    chunk_size: int = 512
    rho_grid: tuple[float, ...] = tuple(1e-3 * v for v in (0.1, 0.5, 1.0, 2.0, 5.0))
    wealth_grid: tuple[float, ...] = (0.0, 1e5, 1e6)
    hull_eps: float = 1e-8
    hull_samples: int = 500

    def __post_init__(self):
        if self.basis_kind not in ("linear", "constant"):
            raise ConfigError(f"unknown basis kind {self.basis_kind!r}")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")


_LIST_FIELDS = {
    "tenors": int,
    "curve_shifts": float,
    "macro_medians": float,
    "coeff_medians": float,
    "rho_grid": float,
    "wealth_grid": float,
}

_KEY_MAP = {
    "basis.kind": "basis_kind",
    "basis.tenors": "tenors",
    "basis.cutoff": "cutoff",
    "shifts.curve": "curve_shifts",
    "shifts.floor": "floor_shift",
    "targets.macro": "macro_medians",
    "targets.coeffs": "coeff_medians",
    "targets.relax_macro": "relax_window_macro",
    "targets.relax_curve": "relax_window_curve",
    "targets.track_curve_months": "track_curve_months",
    "fit.prune_p": "prune_p",
    "sim.scenarios": "scenarios",
    "sim.horizon_days": "horizon_days",
    "sim.month_step": "month_step",
    "sim.seed": "seed",
    "sim.antithetic": "antithetic",
    "sim.record_xi": "record_xi",
    "sim.record_sofr": "record_sofr",
    "sim.floor_round": "floor_round",
    "sim.chunk_size": "chunk_size",
    "price.rho_grid": "rho_grid",
    "price.wealth_grid": "wealth_grid",
    "arb.eps": "hull_eps",
    "arb.samples": "hull_samples",
}


def _convert(name: str, raw: str):
    target = {f.name: f.type for f in fields(AppConfig)}
    if name in _LIST_FIELDS:
        cast = _LIST_FIELDS[name]
        return tuple(cast(tok.strip()) for tok in raw.split(",") if tok.strip())
    kind = target[name]
    if kind == "bool" or isinstance(getattr(AppConfig, name, None), bool):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"cannot parse boolean {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw.strip()


def load_config(path=None, overrides: dict | None = None) -> AppConfig:
    """Defaults, then file values, then explicit overrides."""
    values: dict = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in _KEY_MAP:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            name = _KEY_MAP[key]
            try:
                values[name] = _convert(name, val.strip())
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return AppConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def config_basis(cfg: AppConfig):
    from .curve import BasisFamily

    tenors = cfg.tenors
    if cfg.basis_kind == "constant" and tenors and tenors[0] == 0:
        tenors = tenors[1:]  # leading cell edge at 0 is implicit
    return BasisFamily(cfg.basis_kind, tuple(tenors))


def config_shifts(cfg: AppConfig):
    from .transforms import ShiftConfig

    return ShiftConfig(cfg.curve_shifts, cfg.floor_shift)
