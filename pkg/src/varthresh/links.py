"""Symmetric link distributions (logistic and standard normal)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special


@dataclass(frozen=True)
class LinkFunction:
    """Fixed symmetric distribution ``F`` mapping predictors to probabilities.

    Besides ``F`` and its density ``f``, the methods needed by the fitters
    are provided in numerically stable form: ``log_cdf``, the inverse Mills
    ratio ``f/F`` and its derivative, and ``f'/f`` with its derivative.
    """

    kind: str

    def __post_init__(self):
        if self.kind not in ("logit", "probit"):
            raise ValueError(f"unknown link {self.kind!r}; use 'logit' or 'probit'")

    symmetric = True

    @property
    def variance(self) -> float:
        return 1.0 if self.kind == "probit" else math.pi**2 / 3

    def cdf(self, t):
        return special.ndtr(t) if self.kind == "probit" else special.expit(t)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "probit":
            return np.exp(-0.5 * t * t) / math.sqrt(2 * math.pi)
        F = special.expit(t)
        return F * (1.0 - F)

    def log_pdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "probit":
            return -0.5 * t * t - 0.5 * math.log(2 * math.pi)
        return -np.abs(t) - 2.0 * np.log1p(np.exp(-np.abs(t)))

    def ppf(self, p):
        return special.ndtri(p) if self.kind == "probit" else special.logit(p)

    def log_cdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "probit":
            return special.log_ndtr(t)
        return -np.logaddexp(0.0, -t)

    def mills(self, t):
        """``f(t) / F(t)``."""
        t = np.asarray(t, dtype=float)
        if self.kind == "probit":
            return np.exp(self.log_pdf(t) - special.log_ndtr(t))
        return special.expit(-t)

    def mills_deriv(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "probit":
            h = self.mills(t)
            return -h * (t + h)
        return -self.pdf(t)

    def score_density(self, t):
        """``f'(t) / f(t)``, the derivative of ``log f``."""
        t = np.asarray(t, dtype=float)
        if self.kind == "probit":
            return -t
        return -np.tanh(0.5 * t)

    def score_density_deriv(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "probit":
            return -np.ones_like(t)
        return -2.0 * self.pdf(t)


LOGIT = LinkFunction("logit")
PROBIT = LinkFunction("probit")


def get_link(link) -> LinkFunction:
    if isinstance(link, LinkFunction):
        return link
    return LinkFunction(str(link))
