"""Per-threshold L1-penalized logit fits drop an irrelevant covariate."""

import numpy as np

from varthresh import build_grid, fit_varying_thresholds, standardize
from varthresh.data import Dataset

rng = np.random.default_rng(4)
X = rng.normal(size=(600, 4))
y = 0.8 * X[:, 0] - 0.6 * X[:, 1] + rng.normal(size=600)  # x3, x4 are noise
d, _ = standardize(Dataset(y, X, ("x1", "x2", "x3", "x4")))

fit = fit_varying_thresholds(d.X, d.y, build_grid(d.y, k=8), link="logit", fitter="lasso", lam=0.03)
print(f"{'theta':>8} " + " ".join(f"{n:>7}" for n in d.names))
for th, row in zip(fit.thetas, fit.coef()[:, 1:]):
    print(f"{th:8.3f} " + " ".join(f"{v:7.3f}" for v in row))
