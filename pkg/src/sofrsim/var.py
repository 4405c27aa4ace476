"""Vector-autoregression estimation, diagnostics, stepping, and the drift
calibration that steers simulated medians through user targets.

The model is the difference equation  delta s_t = A s_{t-1} + a_t + eps_t
with Gaussian innovations; stationarity requires the eigenvalues of (A + I)
inside the unit circle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import (
    NumericalFailureError,
    SingularDesignError,
    TargetOutOfRangeError,
    TooShortError,
)


def psd_cholesky(sigma: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Factor L with L @ L.T = sigma for a PSD matrix, allowing exact
    singularity (zero rows stay zero)."""
    sigma = np.asarray(sigma, dtype=float)
    if not np.allclose(sigma, sigma.T, atol=1e-12):
        raise NumericalFailureError("covariance must be symmetric")
    if not sigma.any():
        return np.zeros_like(sigma)
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(sigma)
        scale = max(abs(w[0]), abs(w[-1]), 1e-300)
        if w[0] < -tol * scale:
            raise NumericalFailureError("covariance is not positive semidefinite")
        w = np.clip(w, 0.0, None)
        return v * np.sqrt(w)


@dataclass(frozen=True)
class VarModel:
    """Fitted difference-form VAR with (possibly scheduled) drift."""

    amat: np.ndarray
    drift: np.ndarray  # shape (d,) constant, or (T, d) schedule
    sigma: np.ndarray
    structure: str = "full"
    chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        amat = np.asarray(self.amat, dtype=float)
        drift = np.asarray(self.drift, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        d = amat.shape[0]
        if amat.shape != (d, d) or sigma.shape != (d, d):
            raise ValueError("matrix shapes inconsistent")
        if drift.ndim not in (1, 2) or drift.shape[-1] != d:
            raise ValueError("drift must be (d,) or (T, d)")
        if self.structure == "diagonal" and np.any(amat != np.diag(np.diag(amat))):
            raise ValueError("diagonal structure requires off-diagonal zeros")
        object.__setattr__(self, "amat", amat)
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "chol", psd_cholesky(sigma))

    @property
    def dim(self) -> int:
        return self.amat.shape[0]

    def drift_at(self, t: int) -> np.ndarray:
        if self.drift.ndim == 1:
            return self.drift
        return self.drift[min(t, self.drift.shape[0] - 1)]

    def drift_schedule(self, n_steps: int) -> np.ndarray:
        """Materialized (n_steps, d) drift array."""
        if self.drift.ndim == 1:
            return np.tile(self.drift, (n_steps, 1))
        if self.drift.shape[0] < n_steps:
            tail = np.tile(self.drift[-1], (n_steps - self.drift.shape[0], 1))
            return np.vstack([self.drift, tail])
        return self.drift[:n_steps]

    def with_drift(self, drift: np.ndarray) -> "VarModel":
        return VarModel(self.amat, drift, self.sigma, self.structure)


@dataclass(frozen=True)
class EstimationReport:
    coeffs: np.ndarray
    intercept: np.ndarray
    std_errors: np.ndarray
    p_values: np.ndarray
    pruned: np.ndarray
    residuals: np.ndarray
    eigenvalues: np.ndarray
    notes: tuple[str, ...] = ()


def step(model: VarModel, state: np.ndarray, t: int, eps: np.ndarray) -> np.ndarray:
    """One update of the difference equation."""
    state = np.asarray(state, dtype=float)
    return state + model.amat @ state + model.drift_at(t) + np.asarray(eps, dtype=float)


def stationarity_eigenvalues(model: VarModel) -> np.ndarray:
    """Eigenvalues of (A + I); moduli below one mean a stationary process."""
    return np.linalg.eigvals(model.amat + np.eye(model.dim))


def spectral_radius(model: VarModel) -> float:
    return float(np.max(np.abs(stationarity_eigenvalues(model))))


def is_stable(model: VarModel) -> bool:
    return spectral_radius(model) < 1.0


def _fit_equation(dy, regressors, cols, n_obs):
    """OLS of one equation on selected columns plus intercept.

    Returns (coeffs over cols, intercept, se, p, residuals).
    """
    design = np.column_stack([np.ones(n_obs)] + [regressors[:, j] for j in cols])
    p_params = design.shape[1]
    rank = np.linalg.matrix_rank(design)
    if rank < p_params:
        raise SingularDesignError("regression design is rank deficient")
    beta, _, _, _ = np.linalg.lstsq(design, dy, rcond=None)
    resid = dy - design @ beta
    dof = n_obs - p_params
    rss = float(resid @ resid)
    sigma2 = rss / dof if dof > 0 else 0.0
    xtx_inv = np.linalg.inv(design.T @ design)
    se = np.sqrt(np.clip(sigma2 * np.diag(xtx_inv), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        tstat = np.where(se > 0, beta / se, 0.0)
    pvals = np.where(se > 0, 2.0 * stats.t.sf(np.abs(tstat), max(dof, 1)), 1.0)
    return beta, se, pvals, resid


def estimate(series: np.ndarray, structure: str = "full", prune_p: float | None = None):
    """Fit the VAR by per-equation OLS with optional significance pruning.

    Each equation regresses the first difference on the lagged level (own lag
    only under 'diagonal' structure) with an intercept.  With *prune_p* set,
    coefficients whose two-sided p-value exceeds it are zeroed and the
    equation is re-estimated once on the survivors.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim != 2:
        raise ValueError("series must be a T x d array")
    T, d = series.shape
    if T < d + 2:
        raise TooShortError(f"need at least {d + 2} observations, got {T}")
    if not np.all(np.isfinite(series)):
        raise ValueError("series contains non-finite values")

    dy = np.diff(series, axis=0)
    lagged = series[:-1]
    n_obs = T - 1

    amat = np.zeros((d, d))
    intercept = np.zeros(d)
    std_errors = np.full((d, d), np.nan)
    p_values = np.full((d, d), np.nan)
    pruned = np.zeros((d, d), dtype=bool)
    residuals = np.empty((n_obs, d))
    notes: list[str] = []

    for i in range(d):
        cols = [i] if structure == "diagonal" else list(range(d))
        live = [j for j in cols if np.ptp(lagged[:, j]) > 0.0]
        dropped = [j for j in cols if j not in live]
        if dropped:
            notes.append(f"equation {i}: zero-variance regressors {dropped} dropped")
        if not live:
            intercept[i] = float(np.mean(dy[:, i]))
            residuals[:, i] = dy[:, i] - intercept[i]
            if not residuals[:, i].any():
                notes.append(f"equation {i}: zero residual variance")
            continue
        beta, se, pv, resid = _fit_equation(dy[:, i], lagged, live, n_obs)
        if prune_p is not None:
            keep = [j for j, p in zip(live, pv[1:]) if p <= prune_p]
            for j, p in zip(live, pv[1:]):
                if p > prune_p:
                    pruned[i, j] = True
            if keep != live:
                if keep:
                    beta, se, pv, resid = _fit_equation(dy[:, i], lagged, keep, n_obs)
                else:
                    beta = np.array([float(np.mean(dy[:, i]))])
                    se = np.array([0.0])
                    pv = np.array([1.0])
                    resid = dy[:, i] - beta[0]
                live = keep
        intercept[i] = beta[0]
        for pos, j in enumerate(live, start=1):
            amat[i, j] = beta[pos]
            std_errors[i, j] = se[pos]
            p_values[i, j] = pv[pos]
        residuals[:, i] = resid
        if not resid.any():
            notes.append(f"equation {i}: zero residual variance")

    denom = max(n_obs - d - 1, 1)
    sigma = residuals.T @ residuals / denom
    sigma = 0.5 * (sigma + sigma.T)
    model = VarModel(amat, intercept.copy(), sigma, structure=structure)
    report = EstimationReport(
        coeffs=amat.copy(),
        intercept=intercept,
        std_errors=std_errors,
        p_values=p_values,
        pruned=pruned,
        residuals=residuals,
        eigenvalues=stationarity_eigenvalues(model),
        notes=tuple(notes),
    )
    return model, report


def stationary_drift(model: VarModel, mean_target: np.ndarray) -> np.ndarray:
    """Constant drift making *mean_target* the fixed point of the noiseless
    recursion: a = -A m."""
    return -(model.amat @ np.asarray(mean_target, dtype=float))


@dataclass(frozen=True)
class MedianTargets:
    """Median steering targets in factor space.

    *points* are (step, component, value) triples with 1-based horizons on the
    model's own time grid; *asymptote* optionally pins long-run medians
    (NaN entries leave a component un-steered).
    """

    points: tuple[tuple[int, int, float], ...] = ()
    asymptote: np.ndarray | None = None

    def __post_init__(self):
        seen: dict[int, int] = {}
        for step_, comp, _ in self.points:
            if step_ < 1:
                raise TargetOutOfRangeError("target horizons must be >= 1")
            if comp in seen and step_ <= seen[comp]:
                raise TargetOutOfRangeError(
                    f"horizons for component {comp} must be strictly increasing"
                )
            seen[comp] = max(step_, seen.get(comp, 0))
        if self.asymptote is not None:
            object.__setattr__(
                self, "asymptote", np.asarray(self.asymptote, dtype=float)
            )


def median_path_drift(
    model: VarModel,
    targets: MedianTargets,
    initial: np.ndarray,
    n_steps: int,
    relax_window: int = 12,
):
    """Drift schedule steering the noiseless (median) path through targets.

    Per component a continuous piecewise-linear median path is laid through
    the explicit (step, value) points; when an asymptote is given the path
    ramps linearly from the last explicit point to the asymptote over
    *relax_window* steps and stays there, so the drift equals the stationary
    drift beyond the ramp.  Components with no targets at all evolve by the
    model's own noiseless dynamics.  Because innovations are Gaussian and the
    observable maps are componentwise monotone, this noiseless path is the
    componentwise median path of the transformed observables.

    Returns (drift schedule (n_steps, d), median path (n_steps + 1, d)).
    """
    initial = np.asarray(initial, dtype=float)
    d = model.dim
    if initial.shape != (d,):
        raise ValueError("initial state dimension mismatch")
    if model.drift.ndim != 1:
        raise ValueError("median_path_drift needs a model with constant drift")

    by_comp: dict[int, list[tuple[int, float]]] = {c: [] for c in range(d)}
    for step_, comp, value in targets.points:
        if not 0 <= comp < d:
            raise TargetOutOfRangeError(f"component {comp} out of range")
        if step_ > n_steps:
            raise TargetOutOfRangeError(
                f"target horizon {step_} beyond schedule of {n_steps} steps"
            )
        by_comp[comp].append((int(step_), float(value)))

    asym = targets.asymptote
    pinned = np.zeros(d, dtype=bool)
    pin_path = np.empty((n_steps + 1, d))
    grid = np.arange(n_steps + 1, dtype=float)
    for c in range(d):
        knots = [(0, float(initial[c]))] + sorted(by_comp[c])
        has_asym = asym is not None and np.isfinite(asym[c])
        if has_asym:
            knots.append((knots[-1][0] + relax_window, float(asym[c])))
        if len(knots) == 1:
            continue  # un-steered component
        pinned[c] = True
        ks = np.array([k for k, _ in knots], dtype=float)
        vs = np.array([v for _, v in knots], dtype=float)
        pin_path[:, c] = np.interp(grid, ks, vs)

    drift = np.empty((n_steps, d))
    path = np.empty((n_steps + 1, d))
    path[0] = initial
    base_drift = model.drift
    for t in range(1, n_steps + 1):
        base = path[t - 1] + model.amat @ path[t - 1]
        for c in range(d):
            if pinned[c]:
                path[t, c] = pin_path[t, c]
                drift[t - 1, c] = pin_path[t, c] - base[c]
            else:
                drift[t - 1, c] = base_drift[c]
                path[t, c] = base[c] + base_drift[c]
    return drift, path


def floor_targets_tracking_curve(
    curve,
    x1_median: float,
    shift_cfg,
    monthly_offsets,
    n_track: int,
) -> list[tuple[int, int, float]]:
    """Short-horizon median targets for the log-floor factor such that the
    simulated median short rate follows *curve*'s own forwards.

    The short-end coefficient median is exp(median x1) + median floor - c1;
    solving for the floor median that puts the coefficient median on the
    curve gives the target path.
    """
    from .errors import FactorDomainError

    c1 = shift_cfg.curve_shifts[0]
    cl = shift_cfg.floor_shift
    targets = []
    for m in range(1, n_track + 1):
        offset = int(monthly_offsets[m - 1])
        floor_med = float(curve.rate(offset)) - np.exp(x1_median) + c1
        if floor_med + cl <= 0:
            raise FactorDomainError(
                f"curve-tracking target at step {m} puts floor + shift <= 0"
            )
        targets.append((m, 0, float(np.log(floor_med + cl))))
    return targets
