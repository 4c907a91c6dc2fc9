"""Acceptance criteria 1-12.

Each test records one PASS/FAIL line (printed in the terminal summary) and
then asserts at the stated tolerance.
"""

import time

import numpy as np
import pytest
from scipy import stats

from varthresh import (ConditionalCDF, FitConfig, ForestParams, SplineSpec, bootstrap_bands, build_grid,
                       cdf_eval, compare_methods, fit_irls, fit_lasso, fit_penalized_ml, fit_varying_thresholds,
                       implied_linear_model, ordinal_grid, pava_nonincreasing, rps, simulate_linear, wald_bands)
from varthresh.evaluate import NormalForecast
from varthresh.glm import kkt_residual, lasso_null_lambda, loglik, score
from varthresh.links import LOGIT, PROBIT
from varthresh.spline_ml import (coef_function, feasible_start, linear_summary, penalized_gradient,
                                 penalized_objective)

from .oracles import all_integer_sequences, fd_gradient, isotonic_qp_oracle, normal_crps, rps_quadrature

RESULTS = {}

GAMMA0, GAMMA, SIGMA = 1.0, np.array([0.5, 1.0]), 1.0
SEEDS = range(20)


def record(num, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  [{num:2d}] {title}: {detail}"
    RESULTS[num] = line
    print(line)
    return ok


def central(m):
    """Central 80% of ``m`` interior thresholds."""
    cut = round(0.1 * m)
    return slice(cut, m - cut)


@pytest.fixture(scope="module")
def design_fits():
    """Probit fits on k=20 equal-mass grids, n=1000, one per seed, with timing."""
    t0 = time.perf_counter()
    out = []
    for s in SEEDS:
        d = simulate_linear(1000, GAMMA0, GAMMA, SIGMA, seed=s)
        out.append((d, fit_varying_thresholds(d.X, d.y, build_grid(d.y, k=20), link="probit")))
    return out, time.perf_counter() - t0


def test_01_coefficient_recovery(design_fits):
    fits, elapsed = design_fits
    dev = []
    for _, fit in fits:
        sl = central(fit.thetas.size)
        dev.append(np.abs(fit.coef()[sl, 1:] - GAMMA).mean(axis=0))
    dev = np.mean(dev, axis=0)
    ok = bool(np.all(dev <= 0.12) and elapsed < 30)
    record(1, "simulation coefficient recovery",
           ok, f"mean |b_j - g_j| = {dev[0]:.3f}, {dev[1]:.3f} (tol 0.12), {elapsed:.1f} s (limit 30 s)")
    assert ok


def test_02_linear_intercept(design_fits):
    fits, _ = design_fits
    r2, slope = [], []
    for _, fit in fits:
        sl = central(fit.thetas.size)
        res = stats.linregress(fit.thetas[sl], fit.coef()[sl, 0])
        r2.append(res.rvalue**2)
        slope.append(res.slope)
    r2, slope = np.array(r2), np.array(slope)
    ok = bool(np.all(r2 >= 0.98) and np.all(np.abs(slope + 1 / SIGMA) <= 0.15))
    record(2, "linear intercept function", ok,
           f"min R^2 = {r2.min():.4f} (tol 0.98), slopes in [{slope.min():.3f}, {slope.max():.3f}] "
           f"(target -1 +/- 0.15) over {len(fits)} seeds")
    assert ok


def test_03_cdf_recovery(design_fits):
    fits, _ = design_fits
    x = np.array([-0.94, 0.0])  # true conditional mean 1 - 0.47 = 0.53
    mu = GAMMA0 + x @ GAMMA
    assert mu == pytest.approx(0.53)
    dev = []
    for _, fit in fits:
        c = fit.predict_cdfs(x[None, :])[0]
        inner = c.thetas[1:-1]
        dev.append(np.max(np.abs(c.probs[1:-1] - stats.norm.cdf(inner, mu, SIGMA))))
    mean_dev = float(np.mean(dev))
    ok = mean_dev <= 0.06
    record(3, "CDF recovery at mean 0.53", ok, f"mean max deviation = {mean_dev:.4f} (tol 0.06)")
    assert ok


def test_04_quantile_recovery():
    alphas = np.array([0.25, 0.5, 0.75])
    dev = []
    for s in SEEDS:
        d = simulate_linear(300, GAMMA0, GAMMA, SIGMA, seed=s)
        fit = fit_varying_thresholds(d.X, d.y, build_grid(d.y), link="probit")
        lo, hi = np.quantile(d.X[:, 0], [0.1, 0.9])
        x1 = np.linspace(lo, hi, 25)
        profiles = np.column_stack([x1, np.zeros_like(x1)])
        fitted = np.array([c.quantile(alphas) for c in fit.predict_cdfs(profiles)])
        truth = GAMMA0 + GAMMA[0] * x1[:, None] + SIGMA * stats.norm.ppf(alphas)[None, :]
        dev.append(np.abs(fitted - truth).mean())
    mean_dev = float(np.mean(dev))
    ok = mean_dev <= 0.15
    record(4, "quantile recovery along x1", ok,
           f"mean |q_hat - q| = {mean_dev:.4f} (tol 0.15), n=300 averaged over {len(dev)} seeds")
    assert ok


def test_05_isotonic_oracle():
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    for n in range(1, 7):
        V = all_integer_sequences(n)
        ref = isotonic_qp_oracle(V)
        got = np.array([pava_nonincreasing(v).values for v in V])
        worst = max(worst, float(np.max(np.abs(got - ref))))
        count += V.shape[0]
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 10
    record(5, "isotonic oracle equivalence", ok,
           f"{count} sequences, max |pava - oracle| = {worst:.1e} (tol 1e-10), {elapsed:.1f} s (limit 10 s)")
    assert ok


def test_06_spline_large_lambda():
    d = simulate_linear(1000, GAMMA0, GAMMA, SIGMA, seed=0)
    fit = fit_penalized_ml(d.X, d.y, lam=1e8, link="probit")
    grid = np.linspace(*fit.spec.span, 201)
    ranges = [float(np.ptp(coef_function(fit, j, grid))) for j in (1, 2)]
    g0, g, sigma = implied_linear_model(*linear_summary(fit, d.y), link="probit")
    Xt = np.column_stack([np.ones(d.n), d.X])
    ols, rss = np.linalg.lstsq(Xt, d.y, rcond=None)[:2]
    s_ols = np.sqrt(rss[0] / (d.n - 3))
    rel = np.abs(np.r_[g0, g, sigma] - np.r_[ols, s_ols]) / np.abs(np.r_[ols, s_ols])
    ok = bool(max(ranges) < 1e-3 and np.all(rel < 0.05))
    record(6, "spline ML large-lambda degeneracy", ok,
           f"coefficient ranges {ranges[0]:.1e}, {ranges[1]:.1e} (tol 1e-3); "
           f"max relative gap to OLS (g0, g1, g2, sigma) = {rel.max():.4f} (tol 0.05)")
    assert ok


def test_07_gradients():
    rng = np.random.default_rng(7)
    d = simulate_linear(200, GAMMA0, GAMMA, SIGMA, seed=1)
    y01 = (d.y > 1.0).astype(float)
    worst_bin = 0.0
    for link in (LOGIT, PROBIT):
        for _ in range(10):
            c = rng.normal(scale=1.5, size=3)
            g = score(c, d.X, y01, link)
            num = fd_gradient(lambda b: loglik(b, d.X, y01, link), c)
            worst_bin = max(worst_bin, float(np.max(np.abs(g - num)) / np.max(np.abs(num))))
    spec = SplineSpec.uniform(d.y.min(), d.y.max())
    base = feasible_start(d.X, d.y, spec, PROBIT)
    worst_spl = 0.0
    checked = 0
    while checked < 10:
        a = base + rng.normal(scale=0.05, size=base.shape)
        f = lambda z: penalized_objective(z, d.X, d.y, spec, 5.0)  # noqa: E731
        if not np.isfinite(f(a)):
            continue
        g = penalized_gradient(a, d.X, d.y, spec, 5.0)
        num = fd_gradient(f, a)
        worst_spl = max(worst_spl, float(np.max(np.abs(g - num)) / np.max(np.abs(num))))
        checked += 1
    ok = worst_bin < 1e-4 and worst_spl < 1e-4
    record(7, "gradient correctness", ok,
           f"max relative error binary {worst_bin:.1e}, spline {worst_spl:.1e} (tol 1e-4)")
    assert ok


def _standardized(X):
    return (X - X.mean(axis=0)) / X.std(axis=0, ddof=1)


def test_08_lasso():
    rng = np.random.default_rng(8)
    X = _standardized(rng.normal(size=(300, 4)))
    y = (rng.uniform(size=300) < LOGIT.cdf(0.3 + X @ [1.0, -0.5, 0.25, 0.0])).astype(float)
    gap0 = float(np.max(np.abs(fit_lasso(X, y, 0.0).coef - fit_irls(X, y).coef)))
    null = fit_lasso(X, y, lasso_null_lambda(X, y) * 1.001)
    zeroed = bool(np.all(null.beta == 0))
    worst = 0.0
    for i in range(20):
        p = int(rng.integers(2, 9))
        n = int(rng.integers(60, 400))
        Xi = _standardized(rng.normal(size=(n, p)))
        b = rng.normal(size=p) * (rng.uniform(size=p) < 0.6)
        yi = (rng.uniform(size=n) < LOGIT.cdf(rng.normal(scale=0.5) + Xi @ b)).astype(float)
        lam = rng.uniform(0.02, 0.95) * lasso_null_lambda(Xi, yi)
        worst = max(worst, kkt_residual(fit_lasso(Xi, yi, lam), Xi, yi))
    ok = gap0 < 1e-5 and zeroed and worst <= 1e-6
    record(8, "lasso KKT and limits", ok,
           f"|lasso(0) - ML| = {gap0:.1e} (tol 1e-5), null lambda zeroes all: {zeroed}, "
           f"max KKT residual over 20 designs = {worst:.1e} (tol 1e-6)")
    assert ok


def test_09_rps():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(10):
        k = int(rng.integers(2, 10))
        thetas = np.cumsum(np.r_[rng.normal(), rng.uniform(0.05, 1.0, size=k)])
        probs = np.r_[0.0, np.sort(rng.uniform(size=k - 1)), 1.0]
        c = ConditionalCDF(thetas, probs)
        y = rng.uniform(thetas[0] - 0.3, thetas[-1] + 0.3)
        ref = rps_quadrature(lambda t: cdf_eval(c, t), y, min(thetas[0], y), max(thetas[-1], y))
        worst = max(worst, abs(rps(c, y) - ref))
    point = rps(ConditionalCDF([0.4, 0.4], [0.0, 1.0]), 0.4)
    normal = NormalForecast(0.0, 1.0).rps(0.0)
    closed = normal_crps(0.0, 1.0, 0.0)
    ok = worst < 1e-6 and point == 0.0 and abs(normal - 0.23369) <= 1e-4 and abs(normal - closed) < 1e-8
    record(9, "RPS correctness", ok,
           f"max |segment - quadrature| = {worst:.1e} (tol 1e-6), point mass = {point}, "
           f"N(0,1) at 0 = {normal:.6f} (target 0.23369 +/- 1e-4, closed form {closed:.6f})")
    assert ok


def test_10_prediction_ordering():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    X = rng.normal(size=(500, 2))
    y = X[:, 0] * X[:, 1] + 0.5 * rng.normal(size=500)
    rep = compare_methods(X, y, {"VCRF": FitConfig(fitter="forest", forest=ForestParams(seed=1)), "glm": "glm"},
                          n_splits=20, train_frac=0.8, seed=3)
    rf, glm = rep.paired("VCRF"), rep.paired("glm")
    rf_wins = float(np.mean([rf[s][1] < glm[s][1] for s in glm]))

    Xl = rng.normal(size=(500, 2))
    yl = GAMMA0 + Xl @ GAMMA + SIGMA * rng.normal(size=500)
    rep = compare_methods(Xl, yl, {"VCpar": FitConfig(link="probit"), "glm": "glm"},
                          n_splits=20, train_frac=0.8, seed=4)
    vc, glm_l = rep.paired("VCpar"), rep.paired("glm")
    glm_wins = float(np.mean([glm_l[s][1] <= vc[s][1] for s in glm_l]))
    elapsed = time.perf_counter() - t0
    ok = rf_wins >= 0.8 and glm_wins >= 0.6 and elapsed < 300
    record(10, "prediction ordering", ok,
           f"interaction: VCRF beats glm in {rf_wins:.0%} of splits (need 80%); "
           f"linear: glm not worse than VCpar in {glm_wins:.0%} (need 60%); {elapsed:.0f} s (limit 300 s)")
    assert ok


def test_11_bootstrap(design_fits):
    fits, _ = design_fits
    d, fit = fits[0]
    cfg = FitConfig(link="probit", k=20)
    grid = fit.grid
    a = bootstrap_bands(d.X, d.y, cfg, B=200, level=0.95, seed=11, grid=grid)
    b = bootstrap_bands(d.X, d.y, cfg, B=200, level=0.95, seed=11, grid=grid)
    c = bootstrap_bands(d.X, d.y, cfg, B=200, level=0.95, seed=11, grid=grid, n_jobs=4)
    identical = all(np.array_equal(getattr(a, f), getattr(o, f)) for o in (b, c) for f in ("lower", "upper"))
    narrow = bootstrap_bands(d.X, d.y, cfg, B=200, level=0.90, seed=11, grid=grid)
    wider = bool(np.all(a.width >= narrow.width))
    wald = wald_bands(fit, 0.95)
    sl = central(fit.thetas.size)
    rel = np.abs(a.width[:, sl] - wald.width[:, sl]) / wald.width[:, sl]
    med = float(np.median(rel))
    ok = identical and wider and med < 0.25
    record(11, "bootstrap determinism and sanity", ok,
           f"bit-identical across runs and n_jobs: {identical}; 0.95 >= 0.90 width everywhere: {wider}; "
           f"median relative width gap to Wald = {med:.3f} (tol 0.25)")
    assert ok


def test_12_ordinal():
    rng = np.random.default_rng(12)
    n, beta = 2000, np.array([0.8, -0.5])
    cuts = np.array([-1.5, -0.4, 0.5, 1.6])
    X = rng.normal(size=(n, 2))
    y = 1.0 + np.searchsorted(cuts, X @ beta + rng.logistic(size=n))
    fit = fit_varying_thresholds(X, y, ordinal_grid(5), link="logit")
    dev = float(np.mean(np.abs(fit.coef()[:, 1:] - beta)))

    cuts10 = np.linspace(-2.5, 2.5, 9)
    y10 = 1.0 + np.searchsorted(cuts10, X @ beta + rng.logistic(size=n))
    fit10 = fit_varying_thresholds(X, y10, ordinal_grid(10), link="logit")
    nine = len(fit10.fits) == 9 and np.array_equal(fit10.thetas, np.arange(1.0, 10.0))
    ok = dev <= 0.15 and nine
    record(12, "ordinal path", ok,
           f"mean |b_hat - b| over 4 thresholds = {dev:.4f} (tol 0.15); k=10 grid fits {len(fit10.fits)} thresholds")
    assert ok
