"""Varying-thresholds models and the conditional distributions they imply.

One binary model ``P(Y > theta_r | x) = F(eta_r(x))`` is fitted per interior
threshold. For a covariate vector the predictors ``eta_r(x)`` are made
non-increasing in ``r`` by pool-adjacent-violators, turned into
``F(theta_r | x) = 1 - F(eta_r(x))`` and interpolated linearly between
thresholds, with 0 at the smallest and 1 at the largest threshold.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from ._errors import DataError, SingleClassError
from .forest import Forest, ForestParams, fit_forest
from .glm import BinaryFit, fit_irls, fit_lasso
from .isotonic import pava_nonincreasing
from .links import LinkFunction, get_link
from .thresholds import ThresholdGrid, binarize, build_grid

FITTERS = ("ml", "lasso", "forest")
INTERCEPT = "(Intercept)"


@dataclass(frozen=True)
class FitConfig:
    """Everything needed to refit a varying-thresholds model on new data."""

    fitter: str = "ml"
    link: str = "logit"
    lam: float = 0.0
    forest: ForestParams = field(default_factory=ForestParams)
    k: int | None = None
    strategy: str = "equal-mass"

    def __post_init__(self):
        if self.fitter not in FITTERS:
            raise DataError(f"unknown fitter {self.fitter!r}; choose from {FITTERS}")
        get_link(self.link)
        if self.fitter == "lasso" and self.link != "logit":
            raise DataError("the lasso fitter requires the logit link")


@dataclass(frozen=True)
class VTFit:
    grid: ThresholdGrid
    link: LinkFunction
    fits: list
    names: tuple
    meta: dict = field(default_factory=dict)

    @property
    def thetas(self) -> np.ndarray:
        """Interior thresholds, one per fitted model."""
        return self.grid.interior

    @property
    def has_coefficients(self) -> bool:
        return all(isinstance(f, BinaryFit) for f in self.fits)

    @property
    def coef_names(self) -> tuple:
        return (INTERCEPT, *self.names)

    def coef(self) -> np.ndarray:
        """(k-1, p+1) matrix of raw per-threshold estimates, intercept first."""
        if not self.has_coefficients:
            raise DataError("forest-based fits have no coefficient functions")
        return np.array([f.coef for f in self.fits])

    def se(self) -> np.ndarray:
        if not self.has_coefficients or any(f.se is None for f in self.fits):
            raise DataError("standard errors exist only for maximum-likelihood fits")
        return np.array([f.se for f in self.fits])

    def eta(self, X) -> np.ndarray:
        """Raw predictors, shape (m, k-1), before monotonization."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.names):
            raise DataError(f"covariate rows have length {X.shape[1]}, model expects {len(self.names)}")
        cols = []
        for f in self.fits:
            if isinstance(f, Forest):
                cols.append(f.predict_eta(X, self.link))
            else:
                cols.append(f.predict_eta(X))
        return np.column_stack(cols) if cols else np.empty((X.shape[0], 0))

    def predict_cdfs(self, X) -> list:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return [_cdf_from_eta(self, e) for e in self.eta(X)]


def _fit_one(X, y, theta, link, fitter, lam, forest_params, r):
    y01 = binarize(y, theta)
    if y01.min() == y01.max():
        raise SingleClassError(threshold=theta)
    if fitter == "ml":
        return fit_irls(X, y01, link)
    if fitter == "lasso":
        return fit_lasso(X, y01, lam, link)
    return fit_forest(X, y01, forest_params, stream=(r,))


def fit_varying_thresholds(X, y, grid: ThresholdGrid, link="logit", fitter="ml", lam=0.0,
                           forest_params: ForestParams | None = None, names=None, n_jobs=1) -> VTFit:
    """Fit one binary model per interior threshold of ``grid``.

    ``fitter`` is ``"ml"`` (IRLS), ``"lasso"`` (penalty ``lam``, logit only)
    or ``"forest"``. Threshold fits are independent; ``n_jobs`` runs them in
    threads without changing results.
    """
    link = get_link(link)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] != y.size:
        raise DataError(f"X has {X.shape[0]} rows but y has {y.size}")
    if fitter not in FITTERS:
        raise DataError(f"unknown fitter {fitter!r}")
    if forest_params is None:
        forest_params = ForestParams()
    names = tuple(names) if names is not None else tuple(f"x{j + 1}" for j in range(X.shape[1]))
    jobs = (delayed(_fit_one)(X, y, th, link, fitter, lam, forest_params, r)
            for r, th in enumerate(grid.interior))
    if n_jobs == 1:
        fits = [fn(*a, **kw) for fn, a, kw in jobs]
    else:
        fits = Parallel(n_jobs=n_jobs, prefer="threads")(jobs)
    meta = {"fitter": fitter, "lam": float(lam)}
    if fitter == "forest":
        meta["forest"] = forest_params
    return VTFit(grid, link, fits, names, meta)


def fit_config(X, y, config: FitConfig, grid: ThresholdGrid | None = None, names=None, n_jobs=1) -> VTFit:
    if grid is None:
        grid = build_grid(y, config.k, config.strategy)
    return fit_varying_thresholds(X, y, grid, config.link, config.fitter, config.lam,
                                  config.forest, names=names, n_jobs=n_jobs)


@dataclass(frozen=True)
class ConditionalCDF:
    """Estimated ``F(y | x)``.

    Continuous: piecewise linear through ``(thetas[i], probs[i])`` with
    ``probs[0] == 0`` and ``probs[-1] == 1``; repeated knots encode jumps.
    Discrete: a step function with ``thetas`` the support points and
    ``probs`` the cumulative probabilities there (last one equal to 1).
    """

    thetas: np.ndarray
    probs: np.ndarray
    discrete: bool = False

    def __post_init__(self):
        t = np.array(self.thetas, dtype=float)
        pr = np.array(self.probs, dtype=float)
        if t.shape != pr.shape or t.ndim != 1 or t.size < 1:
            raise DataError("thetas and probs must be equal-length vectors")
        if np.any(np.diff(t) < 0) or np.any(np.diff(pr) < -1e-12):
            raise DataError("knots and probabilities must be non-decreasing")
        pr = np.clip(np.maximum.accumulate(pr), 0.0, 1.0)
        if not self.discrete and (pr[0] != 0.0 or pr[-1] != 1.0 or t.size < 2):
            raise DataError("continuous CDF must start at 0 and end at 1")
        if self.discrete and pr[-1] != 1.0:
            raise DataError("discrete CDF must reach 1 at the last support point")
        t.setflags(write=False)
        pr.setflags(write=False)
        object.__setattr__(self, "thetas", t)
        object.__setattr__(self, "probs", pr)

    def __call__(self, theta):
        return cdf_eval(self, theta)

    def quantile(self, alpha):
        return quantile(self, alpha)

    def median(self) -> float:
        return float(quantile(self, 0.5))

    def moments(self):
        return moments(self)

    def rps(self, y) -> float:
        return rps(self, y)

    point = median


def _cdf_from_eta(fit: VTFit, eta_row) -> ConditionalCDF:
    mono = pava_nonincreasing(eta_row).values if eta_row.size else eta_row
    inner = fit.link.cdf(-mono)
    if fit.grid.kind == "ordinal":
        k = fit.grid.k
        return ConditionalCDF(np.arange(1.0, k + 1), np.append(inner, 1.0), discrete=True)
    return ConditionalCDF(fit.grid.thetas, np.concatenate([[0.0], inner, [1.0]]))


def conditional_cdf(fit: VTFit, x) -> ConditionalCDF:
    """Monotonized conditional CDF for one covariate vector."""
    x = np.asarray(x, dtype=float).reshape(-1)
    return _cdf_from_eta(fit, fit.eta(x[None, :])[0])


def cdf_eval(c: ConditionalCDF, theta):
    """Evaluate ``c`` at ``theta`` (scalar or array); right-continuous at jumps."""
    t = np.asarray(theta, dtype=float)
    j = np.searchsorted(c.thetas, t, side="right") - 1
    if c.discrete:
        out = np.where(j < 0, 0.0, c.probs[np.clip(j, 0, None)])
    else:
        last = c.thetas.size - 1
        jj = np.clip(j, 0, last - 1)
        a, b = c.thetas[jj], c.thetas[jj + 1]
        pa, pb = c.probs[jj], c.probs[jj + 1]
        with np.errstate(invalid="ignore", divide="ignore"):
            lin = pa + (pb - pa) * (t - a) / (b - a)
        out = np.where(j < 0, 0.0, np.where(j >= last, 1.0, lin))
    return float(out) if out.ndim == 0 else out


def quantile(c: ConditionalCDF, alpha):
    """Generalized inverse: smallest ``theta`` with ``F(theta) >= alpha``."""
    a = np.asarray(alpha, dtype=float)
    if np.any((a <= 0) | (a >= 1)):
        raise DataError("alpha must lie strictly between 0 and 1")
    j = np.searchsorted(c.probs, a, side="left")
    if c.discrete:
        out = c.thetas[j]
    else:
        j = np.clip(j, 1, c.thetas.size - 1)
        a0, a1 = c.thetas[j - 1], c.thetas[j]
        p0, p1 = c.probs[j - 1], c.probs[j]
        with np.errstate(invalid="ignore", divide="ignore"):
            inner = a0 + (a1 - a0) * (a - p0) / (p1 - p0)
        out = np.where(p1 == a, a1, inner)
    return float(out) if out.ndim == 0 else out


def moments(c: ConditionalCDF):
    """Mean, median and sd of the distribution described by ``c``.

    The continuous case is a mixture of uniforms, one per segment.
    """
    if c.discrete:
        pmf = np.diff(np.concatenate([[0.0], c.probs]))
        mean = float(pmf @ c.thetas)
        m2 = float(pmf @ c.thetas**2)
    else:
        mass = np.diff(c.probs)
        a, b = c.thetas[:-1], c.thetas[1:]
        mean = float(mass @ (a + b) / 2)
        m2 = float(mass @ (a * a + a * b + b * b) / 3)
    return mean, c.median(), float(np.sqrt(max(m2 - mean * mean, 0.0)))


def rps(c: ConditionalCDF, y: float) -> float:
    """Exact ``integral (1{y <= t} - F(t))^2 dt`` over the real line.

    Outside the knot range F is 0 (left) or 1 (right), so only the stretch
    between ``y`` and the range contributes there.
    """
    y = float(y)
    t = c.thetas
    total = max(t[0] - y, 0.0) + max(y - t[-1], 0.0)
    for i in range(t.size - 1):
        a, b = t[i], t[i + 1]
        if b <= a:
            continue
        pa = c.probs[i]
        pb = pa if c.discrete else c.probs[i + 1]
        pieces = [(a, b)] if not a < y < b else [(a, y), (y, b)]
        for u, v in pieces:
            ind = 1.0 if u >= y else 0.0
            fu = pa + (pb - pa) * (u - a) / (b - a)
            fv = pa + (pb - pa) * (v - a) / (b - a)
            gu, gv = ind - fu, ind - fv
            total += (v - u) * (gu * gu + gu * gv + gv * gv) / 3.0
    return float(total)


def coefficient_table(fit: VTFit, level: float = 0.95) -> list:
    """Long-format rows ``(theta, coef_name, estimate, se_lower, se_upper)``.

    Bounds are ``estimate -/+ z * se`` from the raw per-threshold fits and
    are ``None`` when the fitter gives no standard errors.
    """
    est = fit.coef()
    try:
        se = fit.se()
    except DataError:
        se = None
    z = stats.norm.ppf(0.5 + level / 2)
    rows = []
    for j, name in enumerate(fit.coef_names):
        for r, theta in enumerate(fit.thetas):
            lo = hi = None
            if se is not None:
                lo, hi = est[r, j] - z * se[r, j], est[r, j] + z * se[r, j]
            rows.append((float(theta), name, float(est[r, j]), lo, hi))
    return rows


def write_coefficients_csv(fit: VTFit, path, level: float = 0.95):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "coef_name", "estimate", "se_lower", "se_upper"])
        for theta, name, est, lo, hi in coefficient_table(fit, level):
            w.writerow([repr(theta), name, repr(est),
                        "" if lo is None else repr(float(lo)), "" if hi is None else repr(float(hi))])
