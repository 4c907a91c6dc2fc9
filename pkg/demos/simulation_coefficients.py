"""Recover constant covariate effects and a linear intercept from a normal linear model.

Data follow ``Y = 1 + 0.5 x1 + x2 + eps``. A probit fit on 20 equal-mass
thresholds should give slopes near (0.5, 1) at every threshold and an
intercept function close to ``1 - theta``.
"""

import numpy as np

from varthresh import build_grid, fit_varying_thresholds, simulate_linear

d = simulate_linear(1000, 1.0, [0.5, 1.0], 1.0, seed=0)
fit = fit_varying_thresholds(d.X, d.y, build_grid(d.y, k=20), link="probit")

print(f"{'theta':>8} {'b0':>8} {'b1':>8} {'b2':>8}")
for th, row in zip(fit.thetas, fit.coef()):
    print(f"{th:8.3f} " + " ".join(f"{v:8.3f}" for v in row))

slope, icpt = np.polyfit(fit.thetas[2:-2], fit.coef()[2:-2, 0], 1)
print(f"\nintercept function ~ {icpt:.3f} + {slope:.3f} * theta (truth: 1 - theta)")
