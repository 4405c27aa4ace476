"""Fitted model artifact: everything a simulation or arbitrage check needs,
with JSON round-tripping for the command-line pipeline."""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass

import numpy as np

from .curve import BasisFamily
from .errors import ConfigError
from .transforms import ShiftConfig
from .var import VarModel


@dataclass(frozen=True)
class ModelArtifact:
    basis: BasisFamily
    shifts: ShiftConfig
    macro_model: VarModel
    curve_model: VarModel
    macro_state: np.ndarray  # factor-space state at the curve date
    curve_factors: np.ndarray
    curve_date: dt.date | None = None
    diagnostics: dict | None = None

    def initial_coeffs(self) -> np.ndarray:
        from .transforms import from_factors

        floor = float(np.exp(self.macro_state[0])) - self.shifts.floor_shift
        return from_factors(self.curve_factors, floor, self.shifts)


def _drift_to_json(drift: np.ndarray):
    return {"kind": "schedule" if drift.ndim == 2 else "constant", "values": drift.tolist()}


def _var_to_json(model: VarModel) -> dict:
    return {
        "amat": model.amat.tolist(),
        "drift": _drift_to_json(model.drift),
        "sigma": model.sigma.tolist(),
        "structure": model.structure,
    }


def _var_from_json(obj: dict) -> VarModel:
    drift = np.asarray(obj["drift"]["values"], dtype=float)
    return VarModel(
        np.asarray(obj["amat"], dtype=float),
        drift,
        np.asarray(obj["sigma"], dtype=float),
        structure=obj.get("structure", "full"),
    )


def save_artifact(artifact: ModelArtifact, path) -> None:
    payload = {
        "format": "sofrsim-model",
        "version": 1,
        "basis": {"kind": artifact.basis.kind, "tenors": list(artifact.basis.tenors)},
        "shifts": {
            "curve": list(artifact.shifts.curve_shifts),
            "floor": artifact.shifts.floor_shift,
        },
        "macro_model": _var_to_json(artifact.macro_model),
        "curve_model": _var_to_json(artifact.curve_model),
        "macro_state": artifact.macro_state.tolist(),
        "curve_factors": artifact.curve_factors.tolist(),
        "curve_date": artifact.curve_date.isoformat() if artifact.curve_date else None,
        "diagnostics": artifact.diagnostics or {},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_artifact(path) -> ModelArtifact:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model artifact {path}: {exc}") from exc
    if payload.get("format") != "sofrsim-model":
        raise ConfigError(f"{path} is not a model artifact")
    date = payload.get("curve_date")
    return ModelArtifact(
        basis=BasisFamily(payload["basis"]["kind"], tuple(payload["basis"]["tenors"])),
        shifts=ShiftConfig(tuple(payload["shifts"]["curve"]), payload["shifts"]["floor"]),
        macro_model=_var_from_json(payload["macro_model"]),
        curve_model=_var_from_json(payload["curve_model"]),
        macro_state=np.asarray(payload["macro_state"], dtype=float),
        curve_factors=np.asarray(payload["curve_factors"], dtype=float),
        curve_date=dt.date.fromisoformat(date) if date else None,
        diagnostics=payload.get("diagnostics") or None,
    )
