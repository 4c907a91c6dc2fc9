"""Loading, standardizing, splitting and simulating regression data."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from ._errors import DataError


@dataclass(frozen=True)
class Dataset:
    """Response vector ``y`` paired row-wise with covariate matrix ``X``."""

    y: np.ndarray
    X: np.ndarray
    names: tuple

    def __post_init__(self):
        y = np.array(self.y, dtype=float).reshape(-1)
        X = np.array(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if y.size < 1:
            raise DataError("dataset has zero rows")
        if X.ndim != 2 or X.shape[0] != y.size:
            raise DataError(f"X has shape {X.shape}, expected ({y.size}, p)")
        if X.shape[1] < 1:
            raise DataError("dataset needs at least one covariate")
        names = tuple(str(n) for n in self.names)
        if len(names) != X.shape[1]:
            raise DataError(f"{len(names)} names for {X.shape[1]} covariates")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise DataError("dataset contains non-finite values")
        y.setflags(write=False)
        X.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.y[rows], self.X[rows], self.names)


@dataclass(frozen=True)
class ScalingRecord:
    means: np.ndarray
    sds: np.ndarray

    def apply(self, X):
        """Scale new covariate rows with the stored means and sds."""
        return (np.asarray(X, dtype=float) - self.means) / self.sds


def load_csv(path, response: str, covariates) -> Dataset:
    """Read a comma-separated file with a header row.

    Error messages use 1-based row numbers counting the header as row 1.
    """
    if not os.path.isfile(path):
        raise DataError(f"no such file: {path}")
    covariates = list(covariates)
    if not covariates:
        raise DataError("at least one covariate column is required")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        cols = [response] + covariates
        idx = []
        for c in cols:
            if c not in header:
                raise DataError(f"{path}: missing column {c!r}")
            idx.append(header.index(c))
        rows = []
        for rownum, rec in enumerate(reader, start=2):
            if not rec or all(not f.strip() for f in rec):
                continue
            vals = []
            for c, j in zip(cols, idx):
                cell = rec[j].strip() if j < len(rec) else ""
                try:
                    v = float(cell)
                except ValueError:
                    v = math.nan
                if not math.isfinite(v):
                    raise DataError(f"{path}: row {rownum}, column {c!r}: cannot parse {cell!r} as a finite number")
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: zero data rows")
    arr = np.array(rows)
    return Dataset(arr[:, 0], arr[:, 1:], tuple(covariates))


def write_csv(d: Dataset, path, response="y"):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([response, *d.names])
        for yi, xi in zip(d.y, d.X):
            w.writerow([repr(float(yi)), *(repr(float(v)) for v in xi)])


def standardize(d: Dataset):
    """Center and scale every covariate to sample mean 0 and sd 1 (ddof=1).

    Returns the standardized dataset and the ``ScalingRecord`` holding the
    original means and sds. The response is left untouched.
    """
    if d.n < 2:
        raise DataError("standardization needs at least two rows")
    means = d.X.mean(axis=0)
    sds = d.X.std(axis=0, ddof=1)
    bad = [d.names[j] for j in np.flatnonzero(~(sds > 0))]
    if bad:
        raise DataError(f"constant column(s), sd = 0: {', '.join(bad)}")
    rec = ScalingRecord(means, sds)
    return Dataset(d.y, rec.apply(d.X), d.names), rec


def split(d: Dataset, train_frac: float, seed: int):
    """Seeded shuffle followed by a prefix split into (train, test)."""
    if not 0 < train_frac < 1:
        raise DataError(f"train_frac must lie in (0, 1), got {train_frac}")
    n_train = int(round(d.n * train_frac))
    if n_train < 1 or n_train > d.n - 1:
        raise DataError(f"train_frac={train_frac} on n={d.n} leaves an empty part")
    perm = np.random.default_rng(seed).permutation(d.n)
    return d.subset(np.sort(perm[:n_train])), d.subset(np.sort(perm[n_train:]))


def simulate_linear(n: int, gamma0: float, gamma, sigma: float, seed: int) -> Dataset:
    """Draw ``Y = gamma0 + x'gamma + sigma * eps`` with standard normal x and eps."""
    if not sigma > 0:
        raise DataError("sigma must be positive")
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, gamma.size))
    eps = rng.standard_normal(n)
    y = gamma0 + X @ gamma + sigma * eps
    return Dataset(y, X, tuple(f"x{j + 1}" for j in range(gamma.size)))
