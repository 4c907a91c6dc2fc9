"""Threshold grids over the response range and binarization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._errors import DataError


@dataclass(frozen=True)
class ThresholdGrid:
    """Ordered thresholds ``theta_0 < ... < theta_k``.

    Only the interior thresholds are fitted; the two end points anchor the
    estimated CDF at 0 and 1. ``collapsed`` is set when duplicate quantiles
    were merged and ``k`` is smaller than requested.
    """

    thetas: np.ndarray
    kind: str = "continuous"
    collapsed: bool = False

    def __post_init__(self):
        t = np.array(self.thetas, dtype=float).reshape(-1)
        if t.size < 2 or np.any(np.diff(t) <= 0) or not np.all(np.isfinite(t)):
            raise DataError("thresholds must be finite and strictly increasing")
        if self.kind not in ("continuous", "ordinal"):
            raise DataError(f"unknown grid kind {self.kind!r}")
        t.setflags(write=False)
        object.__setattr__(self, "thetas", t)

    @property
    def k(self) -> int:
        return self.thetas.size - 1

    @property
    def interior(self) -> np.ndarray:
        return self.thetas[1:-1]

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "thetas": self.thetas.tolist()})

    @classmethod
    def from_json(cls, s: str) -> "ThresholdGrid":
        obj = json.loads(s)
        return cls(np.asarray(obj["thetas"]), obj["kind"])


def default_k(y) -> int:
    return min(20, np.unique(y).size - 1)


def build_grid(y, k: int | None = None, strategy: str = "equal-mass") -> ThresholdGrid:
    """Grid spanning ``[min(y), max(y)]`` with ``k`` intervals.

    ``equal-spacing`` puts interior thresholds uniformly on the range;
    ``equal-mass`` uses the type-1 empirical quantiles, i.e. the order
    statistic at 1-based position ``ceil(n * j / k)``.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size == 0:
        raise DataError("empty response")
    lo, hi = float(y.min()), float(y.max())
    if lo == hi:
        raise DataError("all responses identical; no thresholds possible")
    if k is None:
        k = max(2, default_k(y))
    if k < 2:
        raise DataError(f"k must be at least 2, got {k}")
    if strategy == "equal-spacing":
        inner = np.linspace(lo, hi, k + 1)[1:-1]
    elif strategy == "equal-mass":
        ys = np.sort(y)
        n = ys.size
        pos = [math.ceil(n * j / k) for j in range(1, k)]
        inner = ys[np.array(pos) - 1]
    else:
        raise DataError(f"unknown grid strategy {strategy!r}")
    thetas = np.unique(np.concatenate([[lo], inner, [hi]]))
    return ThresholdGrid(thetas, "continuous", collapsed=thetas.size < k + 1)


def ordinal_grid(k_categories: int) -> ThresholdGrid:
    """Grid for responses in ``{1, ..., k}``: interior thresholds at ``1..k-1``.

    The padded end points 0.5 and k + 0.5 only satisfy the grid invariants.
    """
    if k_categories < 2:
        raise DataError(f"need at least 2 categories, got {k_categories}")
    t = np.concatenate([[0.5], np.arange(1, k_categories, dtype=float), [k_categories + 0.5]])
    return ThresholdGrid(t, "ordinal")


def binarize(y, theta: float) -> np.ndarray:
    """``1`` where ``y > theta`` (strict), else ``0``."""
    return (np.asarray(y, dtype=float) > theta).astype(np.int8)
