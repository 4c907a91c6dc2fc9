"""Smooth coefficient functions by penalized maximum likelihood with a CV-chosen penalty."""

import numpy as np

from varthresh import SplineSpec, coef_function, fit_penalized_ml, implied_linear_model, select_lambda_cv, simulate_linear
from varthresh.spline_ml import linear_summary

d = simulate_linear(400, 1.0, [0.5, 1.0], 1.0, seed=2)
spec = SplineSpec.uniform(d.y.min(), d.y.max())
lam = select_lambda_cv(d.X, d.y, spec, [0.1, 1, 10, 100, 1000], folds=5, seed=0)
fit = fit_penalized_ml(d.X, d.y, spec, lam=lam, link="probit")
print(f"chosen lambda: {lam:g}, converged: {fit.converged}")

grid = np.linspace(*np.quantile(d.y, [0.1, 0.9]), 6)
for j, name in enumerate(("intercept", "x1", "x2")):
    print(f"{name:>9}: " + " ".join(f"{v:7.3f}" for v in coef_function(fit, j, grid)))

g0, g, sigma = implied_linear_model(*linear_summary(fit, d.y), link="probit")
print(f"implied linear model: gamma0 {g0:.3f}, gamma {np.round(g, 3)}, sigma {sigma:.3f}")
