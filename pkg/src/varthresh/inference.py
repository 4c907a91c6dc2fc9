"""Pointwise confidence bands for per-threshold coefficient estimates."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from ._errors import DataError, FitError, VTError
from .distribution import FitConfig, VTFit, fit_config
from .thresholds import ThresholdGrid, build_grid


@dataclass(frozen=True)
class CoefBands:
    """Arrays of shape (n_coef, k-1); row ``j`` belongs to ``names[j]``."""

    thetas: np.ndarray
    names: tuple
    estimate: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float
    method: str
    B: int = 0
    failed: int = 0
    widened: np.ndarray | None = None

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def rows(self):
        for j, name in enumerate(self.names):
            for r, th in enumerate(self.thetas):
                yield (name, float(th), float(self.estimate[j, r]), float(self.lower[j, r]),
                       float(self.upper[j, r]), self.method, self.level)


def wald_bands(fit: VTFit, level: float = 0.95) -> CoefBands:
    """``estimate -/+ z * se`` from the raw (pre-monotonization) ML fits."""
    if not 0 < level < 1:
        raise DataError("level must lie in (0, 1)")
    est = fit.coef().T
    se = fit.se().T
    z = stats.norm.ppf((1 + level) / 2)
    return CoefBands(fit.thetas.copy(), fit.coef_names, est, est - z * se, est + z * se, level, "wald")


def _replicate(X, y, config, grid, seed, b):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(b,)))
    rows = rng.integers(0, y.size, size=y.size)
    try:
        return fit_config(X[rows], y[rows], config, grid).coef().T
    except (VTError, np.linalg.LinAlgError):
        return None


def _type1(sorted_vals, q):
    """Order statistic at 1-based position ceil(n * q), along axis 0."""
    n = sorted_vals.shape[0]
    pos = min(max(math.ceil(n * q - 1e-9), 1), n)
    return sorted_vals[pos - 1]


def bootstrap_bands(X, y, config: FitConfig, B: int = 1000, level: float = 0.95, seed: int = 0,
                    grid: ThresholdGrid | None = None, names=None, n_jobs: int = 1) -> CoefBands:
    """Percentile bootstrap bands from case resampling.

    All replicates reuse the full-data grid. Replicate ``b`` draws its rows
    from ``SeedSequence(seed, spawn_key=(b,))``, so results do not depend on
    ``n_jobs``. Failed replicates are dropped; more than 10% failures is an
    error. Where the full-data estimate falls outside its percentile
    interval the interval is widened to include it and ``widened`` is set.
    """
    if B < 2:
        raise DataError("B must be at least 2")
    if not 0 < level < 1:
        raise DataError("level must lie in (0, 1)")
    if config.fitter == "forest":
        raise DataError("forest fits have no coefficient functions to bootstrap")
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if grid is None:
        grid = build_grid(y, config.k, config.strategy)
    full = fit_config(X, y, config, grid, names=names)
    tasks = (delayed(_replicate)(X, y, config, grid, seed, b) for b in range(B))
    if n_jobs == 1:
        reps = [fn(*a, **kw) for fn, a, kw in tasks]
    else:
        reps = Parallel(n_jobs=n_jobs, prefer="threads")(tasks)
    good = [r for r in reps if r is not None]
    failed = B - len(good)
    if failed > 0.1 * B:
        raise FitError(f"{failed} of {B} bootstrap replicates failed")
    draws = np.sort(np.stack(good), axis=0)
    lower = _type1(draws, (1 - level) / 2)
    upper = _type1(draws, (1 + level) / 2)
    est = full.coef().T
    widened = (est < lower) | (est > upper)
    lower = np.minimum(lower, est)
    upper = np.maximum(upper, est)
    return CoefBands(full.thetas.copy(), full.coef_names, est, lower, upper, level, "bootstrap",
                     B, failed, widened)


def write_bands_csv(bands: CoefBands, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["coef", "theta", "estimate", "lower", "upper", "method", "level"])
        for name, th, est, lo, hi, method, level in bands.rows():
            w.writerow([name, repr(th), repr(est), repr(lo), repr(hi), method, level])
