"""Repeated-split comparison of predictive distributions by absolute error and RPS."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy import integrate, stats

from ._errors import DataError, FitError, VTError
from .data import Dataset, split
from .distribution import FitConfig, fit_config


@dataclass(frozen=True)
class NormalForecast:
    mean: float
    sd: float

    def point(self) -> float:
        return self.mean

    def cdf(self, t):
        return stats.norm.cdf(t, self.mean, self.sd)

    def rps(self, y: float) -> float:
        """RPS by adaptive quadrature over ``mean -/+ 8 sd`` (widened to reach ``y``)."""
        lo = min(self.mean - 8 * self.sd, y)
        hi = max(self.mean + 8 * self.sd, y)
        below, _ = integrate.quad(lambda t: self.cdf(t) ** 2, lo, y, epsabs=1e-10, epsrel=1e-8, limit=200)
        above, _ = integrate.quad(lambda t: (1 - self.cdf(t)) ** 2, y, hi, epsabs=1e-10, epsrel=1e-8, limit=200)
        return below + above


def glm_baseline(X_train, y_train, X_test):
    """OLS fit with normal errors; per test row ``(mean, sd)`` arrays.

    ``sd`` is the residual standard error ``sqrt(RSS / (n - p - 1))``.
    """
    X = np.asarray(X_train, dtype=float)
    X = X.reshape(X.shape[0], -1) if X.size else np.empty((len(y_train), 0))
    y = np.asarray(y_train, dtype=float).reshape(-1)
    n, p = X.shape
    if n <= p + 1:
        raise DataError(f"need n > p + 1 observations, got n={n}, p={p}")
    Xt = np.column_stack([np.ones(n), X])
    if np.linalg.matrix_rank(Xt) < p + 1:
        raise DataError("rank-deficient design")
    coef, *_ = np.linalg.lstsq(Xt, y, rcond=None)
    sd = float(np.sqrt(np.sum((y - Xt @ coef) ** 2) / (n - p - 1)))
    Xn = np.asarray(X_test, dtype=float)
    Xn = Xn.reshape(-1, p) if Xn.size else np.empty((Xn.shape[0] if Xn.ndim else 1, 0))
    mean = coef[0] + Xn @ coef[1:]
    return mean, np.full(mean.shape, sd)


def _glm_method(X, y):
    def predict(Xn):
        mean, sd = glm_baseline(X, y, Xn)
        return [NormalForecast(float(m), max(float(s), 1e-12)) for m, s in zip(mean, sd)]
    return predict


def vt_method(config: FitConfig):
    """Method wrapper: fit a varying-thresholds model, forecast with its CDFs."""
    def fit(X, y):
        return fit_config(X, y, config).predict_cdfs
    return fit


@dataclass(frozen=True)
class EvalReport:
    methods: tuple
    records: list
    n_splits: int
    train_frac: float
    skipped: dict = field(default_factory=dict)

    def scores(self, method: str):
        """Per-split ``(mae, rps)`` arrays for one method."""
        rows = [(m, r) for _, name, m, r in self.records if name == method]
        if not rows:
            return np.empty(0), np.empty(0)
        a = np.array(rows)
        return a[:, 0], a[:, 1]

    def paired(self, method: str):
        """Per-split scores keyed by split index."""
        return {s: (m, r) for s, name, m, r in self.records if name == method}

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["split", "method", "mae", "rps"])
            for s, name, mae, r in self.records:
                w.writerow([s, name, repr(mae), repr(r)])


def _resolve(method):
    if method == "glm":
        return _glm_method
    if isinstance(method, FitConfig):
        return vt_method(method)
    if callable(method):
        return method
    raise DataError(f"cannot interpret method {method!r}")


def _score_split(d, methods, train_frac, seed, i):
    train, test = split(d, train_frac, seed + i)
    out = []
    for name, fitter in methods.items():
        try:
            forecasts = fitter(train.X, train.y)(test.X)
        except (VTError, np.linalg.LinAlgError):
            out.append((i, name, None, None))
            continue
        mae = float(np.mean([abs(yi - fc.point()) for fc, yi in zip(forecasts, test.y)]))
        score = float(np.mean([fc.rps(yi) for fc, yi in zip(forecasts, test.y)]))
        out.append((i, name, mae, score))
    return out


def compare_methods(X, y, methods: dict, n_splits: int = 50, train_frac: float = 0.8, seed: int = 0,
                    n_jobs: int = 1) -> EvalReport:
    """Score each method on ``n_splits`` random train/validation splits.

    ``methods`` maps labels to ``"glm"``, a ``FitConfig`` (varying-thresholds
    model, point prediction = median), or a callable ``fit(X, y)`` returning
    ``predict(X_new)`` that yields forecast objects with ``point()`` and
    ``rps(y)``. Split ``i`` uses seed ``seed + i``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    d = Dataset(y, X, tuple(f"x{j + 1}" for j in range(X.shape[1])))
    resolved = {str(k): _resolve(v) for k, v in methods.items()}
    tasks = (delayed(_score_split)(d, resolved, train_frac, seed, i) for i in range(n_splits))
    if n_jobs == 1:
        results = [fn(*a, **kw) for fn, a, kw in tasks]
    else:
        results = Parallel(n_jobs=n_jobs, prefer="threads")(tasks)
    records, skipped = [], {name: 0 for name in resolved}
    for rows in results:
        for i, name, mae, score in rows:
            if mae is None:
                skipped[name] += 1
            else:
                records.append((i, name, mae, score))
    for name, cnt in skipped.items():
        if cnt > 0.1 * n_splits:
            raise FitError(f"method {name!r} failed on {cnt} of {n_splits} splits")
    return EvalReport(tuple(resolved), records, n_splits, train_frac, skipped)
