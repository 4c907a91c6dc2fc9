"""Percentile bootstrap bands for coefficient curves next to Wald bands."""

from varthresh import FitConfig, bootstrap_bands, fit_config, simulate_linear, wald_bands

d = simulate_linear(500, 1.0, [0.5, 1.0], 1.0, seed=6)
cfg = FitConfig(link="probit", k=10)
fit = fit_config(d.X, d.y, cfg)
boot = bootstrap_bands(d.X, d.y, cfg, B=200, level=0.95, seed=1, grid=fit.grid)
wald = wald_bands(fit, 0.95)

print(f"{'theta':>8} {'x1 boot':>17} {'x1 wald':>17}")
for r, th in enumerate(fit.thetas):
    print(f"{th:8.3f} [{boot.lower[1, r]:6.3f},{boot.upper[1, r]:6.3f}] [{wald.lower[1, r]:6.3f},{wald.upper[1, r]:6.3f}]")
print(f"failed replicates: {boot.failed}, widened cells: {int(boot.widened.sum())}")
