"""Binary regression ``P(y=1|x) = F(b0 + x'b)``: ML by IRLS and L1-penalized logit."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._errors import DataError, SingleClassError
from .links import LOGIT, LinkFunction, get_link

MAX_ITER = 100
COEF_CAP = 30.0
WEIGHT_FLOOR = 1e-10


@dataclass(frozen=True)
class BinaryFit:
    beta0: float
    beta: np.ndarray
    se: np.ndarray | None
    converged: bool
    iterations: int
    lam: float
    loglik: float
    link: LinkFunction = field(default=LOGIT)
    separated: bool = False
    history: tuple = field(default=(), repr=False)

    @property
    def coef(self) -> np.ndarray:
        """Intercept followed by slopes."""
        return np.concatenate([[self.beta0], self.beta])

    def predict_eta(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.beta.size:
            raise DataError(f"covariate vector has length {x.shape[-1]}, model expects {self.beta.size}")
        return self.beta0 + x @ self.beta

    def predict_proba(self, x):
        return self.link.cdf(self.predict_eta(x))


def predict_eta(fit: BinaryFit, x):
    return fit.predict_eta(x)


def _check_inputs(X, y01):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y01, dtype=float).reshape(-1)
    if X.shape[0] != y.size:
        raise DataError(f"X has {X.shape[0]} rows but y has {y.size}")
    if not np.all((y == 0) | (y == 1)):
        raise DataError("response must be binary 0/1")
    if y.min() == y.max():
        raise SingleClassError()
    return X, y


def loglik(coef, X, y01, link=LOGIT) -> float:
    """Bernoulli log-likelihood with mean ``F(coef[0] + X @ coef[1:])``."""
    link = get_link(link)
    eta = coef[0] + X @ coef[1:]
    return float(np.sum(y01 * link.log_cdf(eta) + (1 - y01) * link.log_cdf(-eta)))


def score(coef, X, y01, link=LOGIT) -> np.ndarray:
    link = get_link(link)
    eta = coef[0] + X @ coef[1:]
    u = y01 * link.mills(eta) - (1 - y01) * link.mills(-eta)
    return np.concatenate([[u.sum()], X.T @ u])


def _neg_hessian_weights(eta, y01, link):
    return -(y01 * link.mills_deriv(eta) + (1 - y01) * link.mills_deriv(-eta))


def fit_irls(X, y01, link=LOGIT) -> BinaryFit:
    """Maximum likelihood by Newton/IRLS with step halving.

    Stops when the max absolute score drops below 1e-8 or the relative
    log-likelihood change below 1e-10. If any coefficient leaves
    ``[-30, 30]`` the fit is treated as quasi-separated: coefficients are
    clipped, ``separated`` is set and iteration stops.
    """
    link = get_link(link)
    X, y = _check_inputs(X, y01)
    n, p = X.shape
    if n <= p + 1:
        raise DataError(f"need n > p + 1 observations, got n={n}, p={p}")
    Xt = np.column_stack([np.ones(n), X])
    ybar = y.mean()
    coef = np.zeros(p + 1)
    coef[0] = link.ppf(ybar)
    ll = loglik(coef, X, y, link)
    hist = [ll]
    converged = separated = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        g = score(coef, X, y, link)
        if np.max(np.abs(g)) < 1e-8:
            converged = True
            break
        w = np.maximum(_neg_hessian_weights(Xt @ coef, y, link), WEIGHT_FLOOR)
        H = Xt.T @ (w[:, None] * Xt)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, g, rcond=None)[0]
        t = 1.0
        for _ in range(40):
            cand = coef + t * step
            ll_new = loglik(cand, X, y, link)
            if ll_new >= ll:
                break
            t *= 0.5
        else:
            break
        rel = abs(ll_new - ll) / max(abs(ll), 1e-300)
        coef, ll = cand, ll_new
        hist.append(ll)
        if np.max(np.abs(coef)) > COEF_CAP:
            coef = np.clip(coef, -COEF_CAP, COEF_CAP)
            ll = loglik(coef, X, y, link)
            separated = True
            break
        if rel < 1e-10:
            converged = True
            break
    w = _neg_hessian_weights(Xt @ coef, y, link)
    H = Xt.T @ (w[:, None] * Xt)
    try:
        cov = np.linalg.inv(H)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(H)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return BinaryFit(float(coef[0]), coef[1:].copy(), se, converged, it, 0.0, ll, link, separated, tuple(hist))


def lasso_null_lambda(X, y01) -> float:
    """Smallest penalty at which every slope of the logit lasso is zero."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y01, dtype=float)
    return float(np.max(np.abs(X.T @ (y - y.mean()))) / y.size)


def _lasso_objective(coef, X, y, lam):
    return -loglik(coef, X, y, LOGIT) / y.size + lam * np.sum(np.abs(coef[1:]))


def kkt_residual(fit: BinaryFit, X, y01) -> float:
    """Largest violation of the lasso optimality conditions (0 at the exact optimum)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y01, dtype=float)
    g = -score(fit.coef, X, y, LOGIT) / y.size
    lam = fit.lam
    res = [abs(g[0])]
    for gj, bj in zip(g[1:], fit.beta):
        if bj == 0.0:
            res.append(max(abs(gj) - lam, 0.0))
        else:
            res.append(abs(gj + lam * np.sign(bj)))
    return float(max(res))


def fit_lasso(X, y01, lam: float, link=LOGIT, tol: float = 1e-10) -> BinaryFit:
    """L1-penalized logistic regression with unpenalized intercept.

    Minimizes ``-loglik / n + lam * sum|beta_j|`` by cyclic coordinate
    descent on the IRLS quadratic approximation; an outer step that would
    increase the objective is halved. Covariates should be standardized.
    """
    link = get_link(link)
    if link.kind != "logit":
        raise DataError("lasso is implemented for the logit link only")
    if lam < 0:
        raise DataError("lambda must be non-negative")
    X, y = _check_inputs(X, y01)
    n, p = X.shape
    if n <= p + 1:
        raise DataError(f"need n > p + 1 observations, got n={n}, p={p}")
    sds = X.std(axis=0, ddof=1)
    if np.any(np.abs(sds - 1.0) > 1e-6):
        warnings.warn("lasso covariates are not standardized; penalty is scale dependent", stacklevel=2)
    coef = np.zeros(p + 1)
    coef[0] = link.ppf(y.mean())
    obj = _lasso_objective(coef, X, y, lam)
    converged = False
    it = 0
    for it in range(1, 10 * MAX_ITER + 1):
        eta = coef[0] + X @ coef[1:]
        mu = link.cdf(eta)
        w = np.maximum(mu * (1 - mu), WEIGHT_FLOOR)
        z = eta + (y - mu) / w
        new = coef.copy()
        r = z - eta
        xw2 = (w[:, None] * X * X).sum(axis=0) / n
        sw = w.sum()
        for _ in range(1000):
            delta = 0.0
            d0 = np.dot(w, r) / sw
            new[0] += d0
            r -= d0
            delta = abs(d0)
            for j in range(p):
                old = new[j + 1]
                gj = np.dot(w * X[:, j], r) / n + old * xw2[j]
                bj = np.sign(gj) * max(abs(gj) - lam, 0.0) / xw2[j]
                if bj != old:
                    r -= X[:, j] * (bj - old)
                    new[j + 1] = bj
                    delta = max(delta, abs(bj - old))
            if delta < 1e-14:
                break
        step = new - coef
        t = 1.0
        for _ in range(40):
            cand = coef + t * step
            obj_new = _lasso_objective(cand, X, y, lam)
            if obj_new <= obj + 1e-15:
                break
            t *= 0.5
        change = np.max(np.abs(cand - coef))
        coef, obj = cand, obj_new
        if np.max(np.abs(coef)) > COEF_CAP:
            coef = np.clip(coef, -COEF_CAP, COEF_CAP)
            break
        if change < tol:
            converged = True
            break
    ll = loglik(coef, X, y, link)
    return BinaryFit(float(coef[0]), coef[1:].copy(), None, converged, it, float(lam), ll, link,
                     bool(np.max(np.abs(coef)) >= COEF_CAP))
