"""Repeated-split comparison of a normal linear model with parametric and forest threshold models."""

import numpy as np

from varthresh import FitConfig, ForestParams, compare_methods

rng = np.random.default_rng(7)
X = rng.normal(size=(400, 2))
y = X[:, 0] * X[:, 1] + 0.5 * rng.normal(size=400)

methods = {
    "glm": "glm",
    "VCpar": FitConfig(link="logit"),
    "VCRF": FitConfig(fitter="forest", forest=ForestParams(n_trees=200, seed=1)),
}
rep = compare_methods(X, y, methods, n_splits=10, seed=0)
print(f"{'method':>6} {'MAE':>7} {'RPS':>7}")
for name in rep.methods:
    mae, score = rep.scores(name)
    print(f"{name:>6} {mae.mean():7.3f} {score.mean():7.3f}")
