"""Conditional CDF and quartiles along a covariate sweep, compared with the truth."""

import numpy as np
from scipy import stats

from varthresh import build_grid, fit_varying_thresholds, simulate_linear

d = simulate_linear(300, 1.0, [0.5, 1.0], 1.0, seed=3)
fit = fit_varying_thresholds(d.X, d.y, build_grid(d.y), link="probit")

alphas = np.array([0.25, 0.5, 0.75])
x1 = np.linspace(*np.quantile(d.X[:, 0], [0.1, 0.9]), 7)
profiles = np.column_stack([x1, np.zeros_like(x1)])
print(f"{'x1':>7} | fitted q25 q50 q75      | true q25 q50 q75")
for x, c in zip(x1, fit.predict_cdfs(profiles)):
    truth = 1.0 + 0.5 * x + stats.norm.ppf(alphas)
    print(f"{x:7.3f} | " + " ".join(f"{v:6.3f}" for v in c.quantile(alphas))
          + "  | " + " ".join(f"{v:6.3f}" for v in truth))

c = fit.predict_cdfs(np.array([[-0.94, 0.0]]))[0]
mean, _, sd = c.moments()
print(f"\nat x = (-0.94, 0): mean {mean:.3f} (truth 0.53), sd {sd:.3f} (truth 1)")
