"""Command-line front end.

Every output file ``OUT`` is accompanied by ``OUT.meta.json`` holding the
fully resolved configuration. Exit codes: 1 data error, 2 fit failure,
3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from ._errors import DataError, FitError
from .data import load_csv, simulate_linear, standardize, write_csv
from .distribution import FitConfig, conditional_cdf, fit_varying_thresholds, write_coefficients_csv
from .evaluate import compare_methods
from .forest import Forest, ForestParams, write_importance_csv
from .inference import bootstrap_bands, write_bands_csv
from .spline_ml import (SplineSpec, coef_function, coef_function_se, fit_penalized_ml,
                        implied_linear_model, select_lambda_cv)
from .thresholds import build_grid, ordinal_grid

COMMANDS = ("fit", "curves", "cdf", "quantiles", "bootstrap", "importance", "eval", "simulate", "equiv")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _floats(s):
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _names(s):
    return [v.strip() for v in s.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", required=True, help="CSV file with a header row")
    data.add_argument("--response", default="y")
    data.add_argument("--covariates", type=_names, help="comma-separated column names (default: all others)")
    data.add_argument("--standardize", action="store_true", help="scale covariates to mean 0, sd 1")
    data.add_argument("--ordinal", action="store_true", help="response is an ordinal category in 1..k")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--link", choices=("logit", "probit"), default="logit")
    model.add_argument("--fitter", choices=("ml", "lasso", "forest", "spline"), default="ml")
    model.add_argument("--k", type=int, help="number of threshold intervals")
    model.add_argument("--strategy", choices=("equal-mass", "equal-spacing"), default="equal-mass")
    model.add_argument("--lambda", dest="lam", type=float, default=0.0)
    model.add_argument("--lambda-grid", type=_floats, help="spline fitter: choose lambda by CV over these")
    model.add_argument("--folds", type=int, default=5)
    model.add_argument("--spline-m", type=int, default=10)
    model.add_argument("--n-trees", type=int, default=500)
    model.add_argument("--mtry", type=int)
    model.add_argument("--min-node", type=int, default=5)
    model.add_argument("--max-depth", type=int)
    model.add_argument("--seed", type=int, default=0)
    model.add_argument("--n-jobs", type=int, default=1)

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", required=True, help="output file")

    profile = argparse.ArgumentParser(add_help=False)
    profile.add_argument("--at", action="append", default=[],
                         help="covariate profile NAME=V,...; unnamed covariates sit at their means")
    profile.add_argument("--sweep", help="covariate swept over its range when no --at is given")
    profile.add_argument("--points", type=int, default=21)

    p = _Parser(prog="varthresh", description="Varying-thresholds distributional regression")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("fit", parents=[data, model, out], help="fit and write coefficient curves")
    s.add_argument("--level", type=float, default=0.95)
    s.add_argument("--model-out", help="also write the fitted model as JSON")
    s = sub.add_parser("curves", parents=[data, model, out], help="coefficient curves with bands")
    s.add_argument("--level", type=float, default=0.95)
    s.add_argument("--points", type=int, default=101, help="spline fitter: evaluation grid size")
    sub.add_parser("cdf", parents=[data, model, out, profile], help="conditional CDFs at profiles")
    s = sub.add_parser("quantiles", parents=[data, model, out, profile], help="conditional quantiles")
    s.add_argument("--alphas", type=_floats, default=[0.25, 0.5, 0.75])
    s = sub.add_parser("bootstrap", parents=[data, model, out], help="bootstrap coefficient bands")
    s.add_argument("--B", type=int, default=1000)
    s.add_argument("--level", type=float, default=0.95)
    s = sub.add_parser("importance", parents=[data, model, out], help="Gini importance of forest fits")
    s.add_argument("--per-threshold-out", help="also write per-threshold importances")
    s = sub.add_parser("eval", parents=[data, model, out], help="repeated-split prediction comparison")
    s.add_argument("--methods", type=_names, default=["VCpar", "VCRF", "glm"])
    s.add_argument("--splits", type=int, default=50)
    s.add_argument("--train-frac", type=float, default=0.8)
    s = sub.add_parser("simulate", parents=[out], help="simulate from a linear model")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--gamma", type=_floats, default=[1.0, 0.5, 1.0], help="gamma0,gamma1,...")
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s = sub.add_parser("equiv", parents=[out], help="linear model implied by a linear intercept function")
    s.add_argument("--alpha0", type=float, required=True)
    s.add_argument("--slope", type=float, required=True)
    s.add_argument("--beta", type=_floats, default=[])
    s.add_argument("--link", choices=("logit", "probit"), default="probit")
    return p


@dataclass(frozen=True)
class RunConfig:
    command: str
    options: dict

    def sidecar(self) -> dict:
        return {"command": self.command, "version": __version__, "config": self.options}


def _validate(a):
    g = lambda name, default=None: getattr(a, name, default)  # noqa: E731
    if g("fitter") == "lasso" and g("link") != "logit":
        raise ConfigError("--fitter lasso requires --link logit")
    if g("k") is not None and g("k") < 2:
        raise ConfigError("--k must be at least 2")
    if g("lam") is not None and g("lam") < 0:
        raise ConfigError("--lambda must be non-negative")
    for name in ("level", "train_frac"):
        v = g(name)
        if v is not None and not 0 < v < 1:
            raise ConfigError(f"--{name.replace('_', '-')} must lie in (0, 1)")
    if g("alphas") is not None and any(not 0 < v < 1 for v in a.alphas):
        raise ConfigError("--alphas must lie in (0, 1)")
    if a.command == "bootstrap":
        if a.fitter in ("forest", "spline"):
            raise ConfigError("bootstrap supports --fitter ml or lasso")
        if a.B < 2:
            raise ConfigError("--B must be at least 2")
    if a.command == "importance" and a.fitter != "forest":
        raise ConfigError("importance requires --fitter forest")
    if a.command == "simulate" and (a.sigma <= 0 or len(a.gamma) < 2 or a.n < 1):
        raise ConfigError("simulate needs --sigma > 0, --n >= 1 and at least gamma0,gamma1")
    if a.command == "eval":
        bad = [m for m in a.methods if m not in ("VCpar", "VClasso", "VCRF", "glm")]
        if bad:
            raise ConfigError(f"unknown methods {bad}; use VCpar, VClasso, VCRF, glm")
        if a.splits < 1:
            raise ConfigError("--splits must be positive")
    if g("fitter") == "spline" and a.command in ("importance", "eval", "bootstrap"):
        raise ConfigError(f"{a.command} does not support --fitter spline")
    if g("ordinal") and g("fitter") == "spline":
        raise ConfigError("--ordinal is not available with --fitter spline")
    if g("n_trees") is not None and a.n_trees < 1:
        raise ConfigError("--n-trees must be positive")
    if g("points") is not None and a.points < 2:
        raise ConfigError("--points must be at least 2")


def _forest_params(a) -> ForestParams:
    return ForestParams(a.n_trees, a.mtry, a.min_node, a.max_depth, a.seed)


def _fit_cfg(a, fitter=None) -> FitConfig:
    fitter = fitter or a.fitter
    return FitConfig(fitter, a.link, a.lam, _forest_params(a), a.k, a.strategy)


def _load(a):
    covs = a.covariates
    if covs is None:
        if not os.path.isfile(a.input):
            raise DataError(f"no such file: {a.input}")
        with open(a.input, newline="") as fh:
            header = [h.strip() for h in next(csv.reader(fh), [])]
        covs = [h for h in header if h != a.response]
    d = load_csv(a.input, a.response, covs)
    rec = None
    if a.standardize:
        d, rec = standardize(d)
    return d, rec


def _grid(a, y):
    if a.ordinal:
        if np.any(y != np.round(y)) or y.min() < 1:
            raise DataError("ordinal response must hold integer categories 1..k")
        return ordinal_grid(int(y.max()))
    return build_grid(y, a.k, a.strategy)


def _fit_vt(a, d):
    return fit_varying_thresholds(d.X, d.y, _grid(a, d.y), a.link, a.fitter, a.lam,
                                  _forest_params(a), names=d.names, n_jobs=a.n_jobs)


def _fit_spline(a, d):
    spec = SplineSpec.uniform(d.y.min(), d.y.max(), a.spline_m)
    lam = a.lam
    if a.lambda_grid:
        lam = select_lambda_cv(d.X, d.y, spec, a.lambda_grid, a.folds, a.seed, a.link, a.n_jobs)
    fit = fit_penalized_ml(d.X, d.y, spec, lam, a.link)
    if not fit.converged:
        raise FitError("penalized likelihood maximization did not converge")
    return fit


def _write_spline_curves(fit, d, path, level, points):
    from scipy import stats
    z = stats.norm.ppf(0.5 + level / 2)
    grid = np.linspace(*fit.spec.span, points)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "coef_name", "estimate", "se_lower", "se_upper"])
        for j, name in enumerate(("(Intercept)", *d.names)):
            est = coef_function(fit, j, grid)
            se = coef_function_se(fit, j, grid) if fit.cov is not None else None
            for i, th in enumerate(grid):
                lo = "" if se is None else repr(float(est[i] - z * se[i]))
                hi = "" if se is None else repr(float(est[i] + z * se[i]))
                w.writerow([repr(float(th)), name, repr(float(est[i])), lo, hi])


def _write_vt_model(fit, path):
    obj = {"grid": json.loads(fit.grid.to_json()), "link": fit.link.kind, "names": list(fit.names),
           "fitter": fit.meta["fitter"], "lambda": fit.meta["lam"]}
    if fit.has_coefficients:
        obj["coef"] = fit.coef().tolist()
        obj["converged"] = [f.converged for f in fit.fits]
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)


def _profiles(a, d, rec):
    """Covariate rows in model units plus their original-unit labels."""
    raw_X = d.X if rec is None else d.X * rec.sds + rec.means
    means = raw_X.mean(axis=0)
    rows = []
    if a.at:
        for spec in a.at:
            row = means.copy()
            for item in spec.split(","):
                if not item.strip():
                    continue
                if "=" not in item:
                    raise ConfigError(f"--at expects NAME=VALUE pairs, got {item!r}")
                name, val = item.split("=", 1)
                name = name.strip()
                if name not in d.names:
                    raise ConfigError(f"--at names unknown covariate {name!r}")
                try:
                    row[d.names.index(name)] = float(val)
                except ValueError:
                    raise ConfigError(f"--at value {val!r} is not a number") from None
            rows.append(row)
    else:
        var = a.sweep or d.names[0]
        if var not in d.names:
            raise ConfigError(f"--sweep names unknown covariate {var!r}")
        j = d.names.index(var)
        for v in np.linspace(raw_X[:, j].min(), raw_X[:, j].max(), a.points):
            row = means.copy()
            row[j] = v
            rows.append(row)
    raw = np.array(rows)
    model = raw if rec is None else rec.apply(raw)
    return raw, model


def _cmd_fit(a, curves_only=False):
    d, _ = _load(a)
    if a.fitter == "spline":
        fit = _fit_spline(a, d)
        _write_spline_curves(fit, d, a.out, a.level, getattr(a, "points", 101))
        if not curves_only and a.model_out:
            with open(a.model_out, "w") as fh:
                fh.write(fit.to_json())
            return [a.out, a.model_out]
        return [a.out]
    fit = _fit_vt(a, d)
    outs = [a.out]
    if a.fitter == "forest":
        imp = np.mean([f.importances for f in fit.fits], axis=0)
        write_importance_csv(d.names, imp, a.out)
    else:
        write_coefficients_csv(fit, a.out, a.level)
    if not curves_only and a.model_out:
        _write_vt_model(fit, a.model_out)
        outs.append(a.model_out)
    return outs


def _cmd_cdf(a):
    d, rec = _load(a)
    raw, rows = _profiles(a, d, rec)
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["profile", *d.names, "theta", "cdf"])
        if a.fitter == "spline":
            fit = _fit_spline(a, d)
            grid = np.linspace(*fit.spec.span, a.points)
            for i, x in enumerate(rows):
                for th, pr in zip(grid, fit.cdf(x, grid)):
                    w.writerow([i, *map(repr, map(float, raw[i])), repr(float(th)), repr(float(pr))])
        else:
            fit = _fit_vt(a, d)
            for i, x in enumerate(rows):
                c = conditional_cdf(fit, x)
                for th, pr in zip(c.thetas, c.probs):
                    w.writerow([i, *map(repr, map(float, raw[i])), repr(float(th)), repr(float(pr))])
    return [a.out]


def _spline_quantile(fit, x, alpha, points=2001):
    grid = np.linspace(*fit.spec.span, points)
    F = np.maximum.accumulate(fit.cdf(x, grid))
    j = int(np.searchsorted(F, alpha))
    if j == 0:
        return grid[0]
    if j >= grid.size:
        return grid[-1]
    return grid[j - 1] + (grid[j] - grid[j - 1]) * (alpha - F[j - 1]) / max(F[j] - F[j - 1], 1e-300)


def _cmd_quantiles(a):
    d, rec = _load(a)
    raw, rows = _profiles(a, d, rec)
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["profile", *d.names, *(f"q{al:g}" for al in a.alphas)])
        if a.fitter == "spline":
            fit = _fit_spline(a, d)
            qs = [[_spline_quantile(fit, x, al) for al in a.alphas] for x in rows]
        else:
            fit = _fit_vt(a, d)
            qs = [conditional_cdf(fit, x).quantile(np.array(a.alphas)) for x in rows]
        for i, q in enumerate(qs):
            w.writerow([i, *map(repr, map(float, raw[i])), *(repr(float(v)) for v in q)])
    return [a.out]


def _cmd_bootstrap(a):
    d, _ = _load(a)
    bands = bootstrap_bands(d.X, d.y, _fit_cfg(a), a.B, a.level, a.seed, grid=_grid(a, d.y),
                            names=d.names, n_jobs=a.n_jobs)
    write_bands_csv(bands, a.out)
    if bands.failed:
        print(f"warning: {bands.failed} of {a.B} replicates failed and were dropped", file=sys.stderr)
    return [a.out]


def _cmd_importance(a):
    d, _ = _load(a)
    fit = _fit_vt(a, d)
    imps = np.array([f.importances for f in fit.fits if isinstance(f, Forest)])
    write_importance_csv(d.names, imps.mean(axis=0), a.out)
    outs = [a.out]
    if a.per_threshold_out:
        with open(a.per_threshold_out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "variable", "importance"])
            for th, row in zip(fit.thetas, imps):
                for name, v in zip(d.names, row):
                    w.writerow([repr(float(th)), name, repr(float(v))])
        outs.append(a.per_threshold_out)
    return outs


def _cmd_eval(a):
    d, _ = _load(a)
    table = {"VCpar": lambda: _fit_cfg(a, "ml"), "VClasso": lambda: FitConfig("lasso", "logit", a.lam, k=a.k,
             strategy=a.strategy), "VCRF": lambda: _fit_cfg(a, "forest"), "glm": lambda: "glm"}
    methods = {m: table[m]() for m in a.methods}
    rep = compare_methods(d.X, d.y, methods, a.splits, a.train_frac, a.seed, a.n_jobs)
    rep.to_csv(a.out)
    return [a.out]


def _cmd_simulate(a):
    d = simulate_linear(a.n, a.gamma[0], a.gamma[1:], a.sigma, a.seed)
    write_csv(d, a.out)
    return [a.out]


def _cmd_equiv(a):
    try:
        g0, g, sigma = implied_linear_model(a.alpha0, a.slope, a.beta, a.link)
    except DataError as e:
        raise ConfigError(str(e)) from None
    with open(a.out, "w") as fh:
        json.dump({"gamma0": g0, "gamma": g.tolist(), "sigma": sigma}, fh, indent=2)
    return [a.out]


HANDLERS = {
    "fit": _cmd_fit, "curves": lambda a: _cmd_fit(a, curves_only=True), "cdf": _cmd_cdf,
    "quantiles": _cmd_quantiles, "bootstrap": _cmd_bootstrap, "importance": _cmd_importance,
    "eval": _cmd_eval, "simulate": _cmd_simulate, "equiv": _cmd_equiv,
}


def run(config: RunConfig) -> list:
    """Execute one command; returns the list of files written."""
    a = argparse.Namespace(command=config.command, **config.options)
    _validate(a)
    outs = HANDLERS[config.command](a)
    for path in outs:
        with open(f"{path}.meta.json", "w") as fh:
            json.dump(config.sidecar(), fh, indent=2, sort_keys=True)
    return outs


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        opts = {k: v for k, v in vars(ns).items() if k != "command"}
        run(RunConfig(ns.command, opts))
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 3
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 1
    except FitError as e:
        print(f"fit failed: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
