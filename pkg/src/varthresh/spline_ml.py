"""Penalized maximum likelihood with B-spline coefficient functions.

Each coefficient function is a cubic B-spline in the response,
``beta_j(y) = Phi(y) @ alpha[j]``, with row 0 the intercept function. The
conditional CDF is ``1 - F(eta(y, x))`` where
``eta(y, x) = sum_j x_j beta_j(y)`` and ``x_0 = 1``; its density is
``-f(eta) * d eta / dy``, which requires ``d eta / dy < 0`` at every
observation.

The log-likelihood is concave in ``alpha`` for log-concave ``F`` (logistic
and normal both are), and its ``log(-d eta/dy)`` terms go to minus infinity
at the constraint boundary. Damped Newton ascent from a strictly feasible
start therefore stays feasible without a separate barrier.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from ._errors import DataError, FitError
from .links import LinkFunction, get_link

CV_DENSITY_FLOOR = 1e-6


@dataclass(frozen=True)
class SplineSpec:
    knots: np.ndarray
    degree: int = 3

    def __post_init__(self):
        t = np.array(self.knots, dtype=float)
        if t.ndim != 1 or np.any(np.diff(t) < 0):
            raise DataError("knot vector must be non-decreasing")
        if t.size < 2 * self.degree + 2 or t[self.degree] >= t[-self.degree - 1]:
            raise DataError("knot vector too short for the spline degree")
        t.setflags(write=False)
        object.__setattr__(self, "knots", t)

    @classmethod
    def uniform(cls, lo: float, hi: float, M: int = 10, degree: int = 3) -> "SplineSpec":
        """Clamped knots with equally spaced interior knots on ``[lo, hi]``."""
        if M < degree + 1:
            raise DataError(f"need at least {degree + 1} basis functions, got {M}")
        if not hi > lo:
            raise DataError("spline span must have positive length")
        inner = np.linspace(lo, hi, M - degree + 1)
        return cls(np.concatenate([[lo] * degree, inner, [hi] * degree]), degree)

    @property
    def M(self) -> int:
        return self.knots.size - self.degree - 1

    @property
    def span(self):
        return float(self.knots[self.degree]), float(self.knots[-self.degree - 1])

    def greville(self) -> np.ndarray:
        """Knot averages; a spline with these coefficients is the identity."""
        d = self.degree
        return np.array([self.knots[l + 1:l + d + 1].mean() for l in range(self.M)])

    def to_dict(self) -> dict:
        return {"degree": self.degree, "M": self.M, "knots": self.knots.tolist()}


def _basis_table(spec: SplineSpec, y):
    y = np.atleast_1d(np.asarray(y, dtype=float))
    lo, hi = spec.span
    if np.any((y < lo) | (y > hi)) or not np.all(np.isfinite(y)):
        raise DataError(f"evaluation point outside spline span [{lo}, {hi}]")
    t = spec.knots
    nb = t.size - 1
    B = ((t[:-1] <= y[:, None]) & (y[:, None] < t[1:])).astype(float)
    last = np.flatnonzero(t[:-1] < t[1:])[-1]
    B[y == hi, :] = 0.0
    B[y == hi, last] = 1.0
    prev = B
    for d in range(1, spec.degree + 1):
        nb -= 1
        cur = np.zeros((y.size, nb))
        for j in range(nb):
            den1 = t[j + d] - t[j]
            den2 = t[j + d + 1] - t[j + 1]
            if den1 > 0:
                cur[:, j] += (y - t[j]) / den1 * prev[:, j]
            if den2 > 0:
                cur[:, j] += (t[j + d + 1] - y) / den2 * prev[:, j + 1]
        if d < spec.degree:
            prev = cur
        else:
            return cur, prev
    return prev, None


def bspline_basis(spec: SplineSpec, y) -> np.ndarray:
    """Basis values by the Cox-de Boor recursion; shape (len(y), M) or (M,)."""
    B, _ = _basis_table(spec, y)
    return B[0] if np.ndim(y) == 0 else B


def bspline_deriv(spec: SplineSpec, y) -> np.ndarray:
    """First derivatives of the basis functions with respect to ``y``."""
    _, low = _basis_table(spec, y)
    t, d = spec.knots, spec.degree
    D = np.zeros((low.shape[0], spec.M))
    for j in range(spec.M):
        den1 = t[j + d] - t[j]
        den2 = t[j + d + 1] - t[j + 1]
        if den1 > 0:
            D[:, j] += d * low[:, j] / den1
        if den2 > 0:
            D[:, j] -= d * low[:, j + 1] / den2
    return D[0] if np.ndim(y) == 0 else D


def _as_matrix(X, n):
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        return np.empty((n, 0))
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2 or X.shape[0] != n:
        raise DataError(f"X has shape {X.shape}, expected ({n}, p)")
    return X


def _design(X, y, spec):
    """Flattened designs for eta and d eta/dy, one row per observation."""
    y = np.asarray(y, dtype=float).reshape(-1)
    X = _as_matrix(X, y.size)
    Xt = np.column_stack([np.ones(y.size), X])
    B = bspline_basis(spec, y)
    D = bspline_deriv(spec, y)
    n, q = Xt.shape
    Z = (Xt[:, :, None] * B[:, None, :]).reshape(n, q * spec.M)
    Zd = (Xt[:, :, None] * D[:, None, :]).reshape(n, q * spec.M)
    return Z, Zd


def _penalty_matrix(q, M):
    Dm = np.diff(np.eye(M), axis=0)
    block = Dm.T @ Dm
    P = np.zeros((q * M, q * M))
    for j in range(1, q):
        P[j * M:(j + 1) * M, j * M:(j + 1) * M] = block
    return P


class _Objective:
    def __init__(self, X, y, spec, lam, link):
        self.Z, self.Zd = _design(X, y, spec)
        self.q = self.Z.shape[1] // spec.M
        self.P = _penalty_matrix(self.q, spec.M)
        self.lam = float(lam)
        self.link = link

    def log_density(self, a):
        s = self.Zd @ a
        out = np.full(s.shape, -np.inf)
        ok = s < 0
        out[ok] = self.link.log_pdf(self.Z[ok] @ a) + np.log(-s[ok])
        return out

    def loglik(self, a):
        s = self.Zd @ a
        if np.any(s >= 0):
            return -np.inf
        return float(np.sum(self.link.log_pdf(self.Z @ a) + np.log(-s)))

    def value(self, a):
        return self.loglik(a) - self.lam * float(a @ self.P @ a)

    def grad(self, a):
        eta, s = self.Z @ a, self.Zd @ a
        return (self.Z.T @ self.link.score_density(eta) + self.Zd.T @ (1.0 / s)
                - 2 * self.lam * self.P @ a)

    def hess(self, a):
        eta, s = self.Z @ a, self.Zd @ a
        w = self.link.score_density_deriv(eta)
        return ((self.Z.T * w) @ self.Z - (self.Zd.T / (s * s)) @ self.Zd
                - 2 * self.lam * self.P)


def _checked(alpha, X, y, spec, link):
    obj = _Objective(X, y, spec, 0.0, get_link(link))
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (obj.q, spec.M):
        raise DataError(f"alpha has shape {alpha.shape}, expected {(obj.q, spec.M)}")
    return obj, alpha.reshape(-1)


def loglik(alpha, X, y, spec: SplineSpec, link="probit") -> float:
    """Conditional log-likelihood; ``-inf`` if any density is non-positive."""
    obj, a = _checked(alpha, X, y, spec, link)
    return obj.loglik(a)


def log_density(alpha, X, y, spec: SplineSpec, link="probit") -> np.ndarray:
    """Per-observation log density; ``-inf`` where the density is non-positive."""
    obj, a = _checked(alpha, X, y, spec, link)
    return obj.log_density(a)


def penalized_objective(alpha, X, y, spec, lam, link="probit") -> float:
    obj = _Objective(X, y, spec, lam, get_link(link))
    return obj.value(np.asarray(alpha, dtype=float).reshape(-1))


def penalized_gradient(alpha, X, y, spec, lam, link="probit") -> np.ndarray:
    obj = _Objective(X, y, spec, lam, get_link(link))
    return obj.grad(np.asarray(alpha, dtype=float).reshape(-1)).reshape(obj.q, spec.M)


def roughness(alpha) -> float:
    """Total squared first difference of the covariate rows (row 0 excluded)."""
    a = np.asarray(alpha)
    return float(np.sum(np.diff(a[1:], axis=1) ** 2))


@dataclass(frozen=True)
class PMLFit:
    alpha: np.ndarray
    lam: float
    spec: SplineSpec
    link: LinkFunction
    loglik: float
    penalized_loglik: float
    converged: bool
    iterations: int = 0
    history: tuple = ()
    cov: np.ndarray | None = field(default=None, repr=False)
    se_approximate: bool = False

    @property
    def p(self) -> int:
        return self.alpha.shape[0] - 1

    def eta(self, x, y):
        """Predictor ``eta(y, x)`` for one covariate vector over response values."""
        x = np.concatenate([[1.0], np.asarray(x, dtype=float).reshape(-1)])
        return bspline_basis(self.spec, np.atleast_1d(y)) @ (self.alpha.T @ x)

    def cdf(self, x, y):
        """``F(y | x) = 1 - F(eta(y, x))`` on the spline span."""
        return self.link.cdf(-self.eta(x, y))

    def to_json(self) -> str:
        return json.dumps({
            "spec": self.spec.to_dict(),
            "link": self.link.kind,
            "lambda": self.lam,
            "alpha": self.alpha.reshape(-1).tolist(),
            "shape": list(self.alpha.shape),
            "loglik": self.loglik,
            "converged": self.converged,
        })


def _ols(X, y):
    X = _as_matrix(X, y.size)
    Xt = np.column_stack([np.ones(y.size), X])
    coef, *_ = np.linalg.lstsq(Xt, y, rcond=None)
    dof = max(y.size - Xt.shape[1], 1)
    sigma = np.sqrt(np.sum((y - Xt @ coef) ** 2) / dof)
    return coef, sigma


def feasible_start(X, y, spec: SplineSpec, link) -> np.ndarray:
    """Coefficients of the classical linear model, written as a spline model.

    The intercept function is the affine ``(gamma0 - y) / s`` (represented
    exactly through the Greville abscissae) and covariate rows are constant,
    so ``d eta / dy = -1/s < 0`` everywhere.
    """
    link = get_link(link)
    y = np.asarray(y, dtype=float).reshape(-1)
    coef, sigma = _ols(X, y)
    scale = max(sigma, 1e-8 * (np.ptp(y) or 1.0)) / np.sqrt(link.variance)
    alpha = np.empty((coef.size, spec.M))
    alpha[0] = (coef[0] - spec.greville()) / scale
    alpha[1:] = (coef[1:] / scale)[:, None]
    return alpha


def fit_penalized_ml(X, y, spec: SplineSpec | None = None, lam: float = 0.0, link="probit",
                     max_iter: int = 200, tol: float = 1e-9, start=None) -> PMLFit:
    """Maximize ``loglik - lam * sum_{j>=1} sum_l (alpha[j,l+1] - alpha[j,l])^2``.

    The intercept row is not penalized. Every Newton step is halved until
    all monotonicity constraints hold strictly and the objective does not
    decrease, so the objective history is non-decreasing.
    """
    link = get_link(link)
    y = np.asarray(y, dtype=float).reshape(-1)
    X = _as_matrix(X, y.size)
    if spec is None:
        spec = SplineSpec.uniform(y.min(), y.max())
    if lam < 0:
        raise DataError("lambda must be non-negative")
    if y.size <= X.shape[1] + 1:
        raise DataError(f"need n > p + 1 observations, got n={y.size}, p={X.shape[1]}")
    obj = _Objective(X, y, spec, lam, link)
    a = (feasible_start(X, y, spec, link) if start is None else np.asarray(start, dtype=float)).reshape(-1)
    val = obj.value(a)
    if not np.isfinite(val):
        raise FitError("initial coefficients violate the monotonicity constraint")
    hist = [val]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = obj.grad(a)
        H = obj.hess(a)
        try:
            step = np.linalg.solve(-H, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(-H, g, rcond=None)[0]
        decrement = float(g @ step)
        if decrement < 0:
            step, decrement = g, float(g @ g)
        if decrement < 1e-14 * max(1.0, abs(val)):
            converged = True
            break
        t = 1.0
        for _ in range(60):
            cand = a + t * step
            new = obj.value(cand)
            if np.isfinite(new) and new >= val:
                break
            t *= 0.5
        else:
            converged = True
            break
        rel = abs(new - val) / max(abs(val), 1e-300)
        a, val = cand, new
        hist.append(val)
        if rel < tol:
            converged = True
            break
    s = obj.Zd @ a
    try:
        cov = np.linalg.inv(-obj.hess(a))
    except np.linalg.LinAlgError:
        cov = None
    alpha = a.reshape(obj.q, spec.M)
    return PMLFit(alpha, float(lam), spec, link, obj.loglik(a), val, converged, it, tuple(hist),
                  cov, bool(np.any(-s < 1e-4)))


def coef_function(fit: PMLFit, j: int, y_grid) -> np.ndarray:
    """``beta_j(y) = Phi(y) @ alpha[j]``; ``j = 0`` is the intercept function."""
    if not 0 <= j <= fit.p:
        raise DataError(f"coefficient index {j} outside 0..{fit.p}")
    return bspline_basis(fit.spec, np.atleast_1d(y_grid)) @ fit.alpha[j]


def coef_function_se(fit: PMLFit, j: int, y_grid) -> np.ndarray:
    """Pointwise standard error of ``beta_j(y)`` from the inverse observed information."""
    if fit.cov is None:
        raise FitError("information matrix is singular; no standard errors")
    if not 0 <= j <= fit.p:
        raise DataError(f"coefficient index {j} outside 0..{fit.p}")
    M = fit.spec.M
    B = bspline_basis(fit.spec, np.atleast_1d(y_grid))
    C = fit.cov[j * M:(j + 1) * M, j * M:(j + 1) * M]
    return np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", B, C, B), 0.0))


def _cv_score(X, y, spec, lam, link, train, test):
    try:
        fit = fit_penalized_ml(X[train], y[train], spec, lam, link)
    except (FitError, DataError, np.linalg.LinAlgError):
        return -np.inf
    # Constraints bind only at training points, so a held-out point can fall
    # where the fitted density is non-positive; such points score the floor.
    floor = np.log(CV_DENSITY_FLOOR / (spec.span[1] - spec.span[0]))
    return float(np.sum(np.maximum(log_density(fit.alpha, X[test], y[test], spec, link), floor)))


def select_lambda_cv(X, y, spec: SplineSpec, lambdas, folds: int = 5, seed: int = 0,
                     link="probit", n_jobs: int = 1) -> float:
    """Penalty with the largest held-out log-likelihood; ties go to the larger value.

    Held-out log densities are floored at ``log(1e-6 / span length)`` so that
    one held-out point in a region of non-positive fitted density does not
    disqualify a candidate outright.
    """
    link = get_link(link)
    y = np.asarray(y, dtype=float).reshape(-1)
    X = _as_matrix(X, y.size)
    lambdas = sorted(float(v) for v in lambdas)
    if not lambdas:
        raise DataError("empty penalty grid")
    if len(lambdas) == 1:
        return lambdas[0]
    if folds < 2 or folds > y.size:
        raise DataError(f"folds must lie in [2, n], got {folds}")
    perm = np.random.default_rng(seed).permutation(y.size)
    parts = np.array_split(perm, folds)
    tasks = []
    for lam in lambdas:
        for f in range(folds):
            test = parts[f]
            train = np.concatenate([parts[g] for g in range(folds) if g != f])
            tasks.append(delayed(_cv_score)(X, y, spec, lam, link, train, test))
    if n_jobs == 1:
        scores = [fn(*a, **kw) for fn, a, kw in tasks]
    else:
        scores = Parallel(n_jobs=n_jobs, prefer="threads")(tasks)
    totals = np.array(scores).reshape(len(lambdas), folds).sum(axis=1) / y.size
    if not np.any(np.isfinite(totals)):
        raise FitError("every candidate penalty failed in cross-validation")
    best = max(i for i in range(len(lambdas)) if totals[i] == np.max(totals))
    return lambdas[best]


def implied_linear_model(alpha0: float, slope: float, beta, link="probit"):
    """Linear model equivalent to ``P(Y > y | x) = F(alpha0 + slope * y + x'beta)``.

    Returns ``(gamma0, gamma, sigma)`` with ``gamma0 = -alpha0/slope``,
    ``gamma = -beta/slope`` and ``sigma^2 = var_F / slope^2``, i.e. sigma is
    the conditional standard deviation of Y.
    """
    link = get_link(link)
    if not slope < 0:
        raise DataError("slope of the intercept function must be negative")
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    return -alpha0 / slope, -beta / slope, float(np.sqrt(link.variance) / abs(slope))


def linear_summary(fit: PMLFit, y):
    """Affine least-squares approximation of the intercept function at ``y``.

    Returns ``(alpha0, slope, beta)`` with ``beta`` the mean of each
    covariate function over ``y``; feed it to ``implied_linear_model``.
    """
    y = np.asarray(y, dtype=float)
    lo, hi = fit.spec.span
    y = np.clip(y, lo, hi)
    b0 = coef_function(fit, 0, y)
    slope, alpha0 = np.polyfit(y, b0, 1)
    beta = np.array([coef_function(fit, j, y).mean() for j in range(1, fit.p + 1)])
    return float(alpha0), float(slope), beta
