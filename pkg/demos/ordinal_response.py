"""Ordinal response: the threshold path reduces to cumulative binary fits at category cuts."""

import numpy as np

from varthresh import fit_varying_thresholds, ordinal_grid

rng = np.random.default_rng(8)
X = rng.normal(size=(2000, 2))
beta = np.array([0.8, -0.5])
y = 1.0 + np.searchsorted([-1.5, -0.4, 0.5, 1.6], X @ beta + rng.logistic(size=2000))

fit = fit_varying_thresholds(X, y, ordinal_grid(5), link="logit")
print("category counts:", np.bincount(y.astype(int))[1:])
for th, row in zip(fit.thetas, fit.coef()):
    print(f"Y > {th:.0f}: intercept {row[0]:6.3f}, slopes {np.round(row[1:], 3)} (truth {beta})")
c = fit.predict_cdfs(np.zeros((1, 2)))[0]
print("P(Y <= j | x = 0):", np.round(c(np.arange(1, 6)), 3))
