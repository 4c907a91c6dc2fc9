"""Pool-adjacent-violators projection onto non-increasing sequences."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._errors import DataError


@dataclass(frozen=True)
class MonotoneSeq:
    values: np.ndarray
    pooled: np.ndarray


def pava_nonincreasing(eta, weights=None) -> MonotoneSeq:
    """Weighted least-squares fit of ``eta`` under ``v[0] >= v[1] >= ...``.

    Adjacent blocks are merged only on a strict violation, so an input that
    is already non-increasing is returned unchanged.
    """
    eta = np.asarray(eta, dtype=float).reshape(-1)
    if eta.size == 0:
        raise DataError("empty sequence")
    if not np.all(np.isfinite(eta)):
        raise DataError("sequence contains non-finite values")
    if weights is None:
        weights = np.ones_like(eta)
    else:
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if weights.shape != eta.shape:
            raise DataError("weights and values differ in length")
        if np.any(~(weights > 0)):
            raise DataError("weights must be positive")

    # blocks as parallel stacks: weighted mean, total weight, length
    means, wsum, size = [], [], []
    for v, w in zip(eta, weights):
        means.append(v)
        wsum.append(w)
        size.append(1)
        while len(means) > 1 and means[-2] < means[-1]:
            m2, w2, s2 = means.pop(), wsum.pop(), size.pop()
            w1 = wsum[-1]
            means[-1] = (w1 * means[-1] + w2 * m2) / (w1 + w2)
            wsum[-1] = w1 + w2
            size[-1] += s2
    values = np.repeat(means, size)
    pooled = np.repeat(np.array(size) > 1, size)
    return MonotoneSeq(values, pooled)
