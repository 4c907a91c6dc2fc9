"""Random forest for binary labels: CART with Gini splits, bootstrap, random feature subsets.

Trees are stored as parallel node arrays. Node 0 is the root; a node with
``feature == -1`` is a leaf, otherwise rows with ``x[feature] <= threshold``
go to ``left`` and the rest to ``right``.

Randomness is drawn from counter-based substreams: tree ``t`` uses
``SeedSequence(seed, spawn_key=(*stream, t, purpose))`` with purpose 0 for
the bootstrap sample and 1 for the feature draws, so results do not depend
on the order in which trees are built.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from ._errors import DataError

PROB_CLAMP = 1e-6


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 500
    mtry: int | None = None
    min_node: int = 5
    max_depth: int | None = None
    seed: int = 0

    def resolve_mtry(self, p: int) -> int:
        m = math.ceil(math.sqrt(p)) if self.mtry is None else self.mtry
        if not 1 <= m <= p:
            raise DataError(f"mtry must lie in [1, {p}], got {m}")
        return m


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    prob: np.ndarray
    n_node: np.ndarray
    gain: np.ndarray

    @property
    def node_count(self) -> int:
        return self.feature.size

    def apply(self, X) -> np.ndarray:
        """Index of the leaf reached by each row of ``X``."""
        X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=float)))
        return _apply(self.feature, self.threshold, self.left, self.right, X)

    def predict_proba(self, X) -> np.ndarray:
        return self.prob[self.apply(X)]


@numba.njit(cache=True)
def _gini(ones, n):
    if n == 0:
        return 0.0
    q = ones / n
    return 2.0 * q * (1.0 - q)


@numba.njit(cache=True)
def _grow(X, y, samples, mtry, min_node, max_depth, uniforms):
    n_s = samples.size
    p = X.shape[1]
    cap = 2 * n_s + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    prob = np.zeros(cap)
    n_node = np.zeros(cap, np.int64)
    gain = np.zeros(cap)

    work = samples.copy()
    st_node = np.empty(cap, np.int64)
    st_lo = np.empty(cap, np.int64)
    st_hi = np.empty(cap, np.int64)
    st_depth = np.empty(cap, np.int64)
    feats = np.arange(p)
    top = 0
    st_node[0] = 0
    st_lo[0] = 0
    st_hi[0] = n_s
    st_depth[0] = 0
    top = 1
    count = 1
    ucount = 0
    while top > 0:
        top -= 1
        node = st_node[top]
        lo = st_lo[top]
        hi = st_hi[top]
        depth = st_depth[top]
        m = hi - lo
        ones = 0.0
        for i in range(lo, hi):
            ones += y[work[i]]
        n_node[node] = m
        prob[node] = ones / m
        if m <= min_node or ones == 0.0 or ones == m:
            continue
        if max_depth >= 0 and depth >= max_depth:
            continue
        parent = m * _gini(ones, m)

        # partial Fisher-Yates draw of mtry features
        for i in range(p):
            feats[i] = i
        for i in range(mtry):
            r = i + int(uniforms[ucount] * (p - i))
            ucount += 1
            if r >= p:
                r = p - 1
            tmp = feats[i]
            feats[i] = feats[r]
            feats[r] = tmp

        # impure nodes split even at zero gain (XOR-type structure needs it)
        best_gain = -1.0
        best_f = -1
        best_thr = 0.0
        vals = np.empty(m)
        labs = np.empty(m)
        for fi in range(mtry):
            f = feats[fi]
            for i in range(m):
                vals[i] = X[work[lo + i], f]
            order = np.argsort(vals)
            for i in range(m):
                labs[i] = y[work[lo + order[i]]]
            ones_l = 0.0
            for i in range(m - 1):
                ones_l += labs[i]
                a = vals[order[i]]
                b = vals[order[i + 1]]
                if a < b:
                    n_l = i + 1
                    n_r = m - n_l
                    g = parent - n_l * _gini(ones_l, n_l) - n_r * _gini(ones - ones_l, n_r)
                    if g > best_gain:
                        best_gain = g
                        best_f = f
                        thr = 0.5 * (a + b)
                        if thr >= b:
                            thr = a
                        best_thr = thr
        if best_f < 0:
            continue

        # partition work[lo:hi] in place
        i = lo
        j = hi - 1
        while i <= j:
            if X[work[i], best_f] <= best_thr:
                i += 1
            else:
                tmp = work[i]
                work[i] = work[j]
                work[j] = tmp
                j -= 1
        feature[node] = best_f
        threshold[node] = best_thr
        gain[node] = max(best_gain, 0.0)
        left[node] = count
        right[node] = count + 1
        st_node[top] = count
        st_lo[top] = lo
        st_hi[top] = i
        st_depth[top] = depth + 1
        top += 1
        st_node[top] = count + 1
        st_lo[top] = i
        st_hi[top] = hi
        st_depth[top] = depth + 1
        top += 1
        count += 2
    return (feature[:count], threshold[:count], left[:count], right[:count],
            prob[:count], n_node[:count], gain[:count])


@numba.njit(cache=True)
def _apply(feature, threshold, left, right, X):
    out = np.empty(X.shape[0], np.int64)
    for r in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = node
    return out


@numba.njit(cache=True)
def _forest_mean(feature, threshold, left, right, prob, offsets, X):
    n_trees = offsets.size - 1
    out = np.zeros(X.shape[0])
    for r in range(X.shape[0]):
        acc = 0.0
        for t in range(n_trees):
            node = offsets[t]
            base = offsets[t]
            while feature[node] >= 0:
                if X[r, feature[node]] <= threshold[node]:
                    node = base + left[node]
                else:
                    node = base + right[node]
            acc += prob[node]
        out[r] = acc / n_trees
    return out


def _prepare(X, y01):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y01, dtype=float).reshape(-1)
    if X.shape[0] == 0 or y.size == 0:
        raise DataError("empty input")
    if X.shape[0] != y.size:
        raise DataError(f"X has {X.shape[0]} rows but y has {y.size}")
    if not np.all((y == 0) | (y == 1)):
        raise DataError("response must be binary 0/1")
    return np.ascontiguousarray(X), y


def _substream(seed, key):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def fit_tree(X, y01, params: ForestParams = ForestParams(), rng=None, samples=None) -> Tree:
    """Grow one CART tree by greedy Gini-gain splits.

    ``rng`` supplies the feature draws; ``samples`` are the row indices
    (with repetition) the tree is grown on, all rows by default.
    """
    X, y = _prepare(X, y01)
    n, p = X.shape
    mtry = params.resolve_mtry(p)
    if rng is None:
        rng = _substream(params.seed, (0, 1))
    if samples is None:
        samples = np.arange(n)
    samples = np.asarray(samples, dtype=np.int64)
    uniforms = rng.random(samples.size * mtry + mtry)
    max_depth = -1 if params.max_depth is None else int(params.max_depth)
    arrays = _grow(X, y, samples, mtry, int(params.min_node), max_depth, uniforms)
    return Tree(*arrays)


@dataclass(frozen=True)
class Forest:
    trees: list
    params: ForestParams
    importances: np.ndarray
    inbag: np.ndarray | None = None
    _packed: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        sizes = [t.node_count for t in self.trees]
        offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        packed = tuple(np.concatenate([getattr(t, a) for t in self.trees])
                       for a in ("feature", "threshold", "left", "right", "prob"))
        object.__setattr__(self, "_packed", packed + (offsets,))

    @property
    def p(self) -> int:
        return self.importances.size

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.p:
            raise DataError(f"covariate vector has length {X.shape[1]}, forest expects {self.p}")
        out = _forest_mean(*self._packed[:5], self._packed[5], np.ascontiguousarray(X))
        return out[0] if single else out

    def predict_eta(self, X, link):
        """Linear-predictor scale ``F^{-1}(prob)`` with probabilities clamped to [1e-6, 1 - 1e-6]."""
        return link.ppf(np.clip(self.predict_proba(X), PROB_CLAMP, 1 - PROB_CLAMP))

    def oob_proba(self, X) -> np.ndarray:
        """Out-of-bag probability per training row (NaN if a row was in every bootstrap)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        acc = np.zeros(X.shape[0])
        cnt = np.zeros(X.shape[0])
        for t, tree in enumerate(self.trees):
            out = ~self.inbag[t]
            acc[out] += tree.predict_proba(X[out])
            cnt[out] += 1
        with np.errstate(invalid="ignore", divide="ignore"):
            return acc / cnt


def forest_prob(forest: Forest, x):
    return forest.predict_proba(x)


def fit_forest(X, y01, params: ForestParams = ForestParams(), stream=()) -> Forest:
    """Bootstrap-aggregated CART trees.

    Importance of feature ``j`` is the total Gini gain of all splits on
    ``j`` across trees, divided by the number of trees.
    """
    X, y = _prepare(X, y01)
    n, p = X.shape
    if params.n_trees < 1:
        raise DataError("n_trees must be at least 1")
    params.resolve_mtry(p)
    trees = []
    imp = np.zeros(p)
    inbag = np.zeros((params.n_trees, n), dtype=bool)
    for t in range(params.n_trees):
        boot = _substream(params.seed, (*stream, t, 0)).integers(0, n, size=n)
        inbag[t, boot] = True
        tree = fit_tree(X, y, params, _substream(params.seed, (*stream, t, 1)), boot)
        split = tree.feature >= 0
        np.add.at(imp, tree.feature[split], tree.gain[split])
        trees.append(tree)
    return Forest(trees, params, imp / params.n_trees, inbag)


def write_importance_csv(names, importances, path):
    """Two-column table sorted by decreasing importance."""
    order = np.argsort(-np.asarray(importances), kind="stable")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["variable", "importance"])
        for j in order:
            w.writerow([names[j], repr(float(importances[j]))])
