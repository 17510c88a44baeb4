"""Multinomial counts with a uniform prior on the simplex, in log-odds coordinates.

The free parameters are ``theta_j = log(psi_j / psi_k)`` for ``j < k``, so the
parameter space is all of ``R^(k-1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..engine import Objective
from ..errors import DomainError
from ..numerics import log_gamma

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class MultinomialDataset:
    counts: Tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if len(counts) < 2:
            raise DomainError("a multinomial dataset needs k >= 2 categories")
        if min(counts) < 0:
            raise DomainError("category counts must be non-negative")

    @property
    def k(self) -> int:
        return len(self.counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def degenerate(self) -> bool:
        return False


def _log_partition(theta) -> float:
    """``log(1 + sum(exp(theta)))`` without overflow."""
    m = max(0.0, float(np.max(theta)))
    return m + math.log(math.exp(-m) + float(np.sum(np.exp(theta - m))))


def multinomial_exact_log_z(d: MultinomialDataset) -> float:
    return (
        log_gamma(d.k)
        + sum(log_gamma(s + 1) for s in d.counts)
        - log_gamma(d.n + d.k)
    )


def multinomial_log_laplace_closed(d: MultinomialDataset) -> float:
    nk = d.n + d.k
    return (
        0.5 * (d.k - 1) * _LOG_2PI
        + 0.5 * math.log(nk)
        + log_gamma(d.k)
        - 0.5 * sum(math.log(s + 1) for s in d.counts)
        + sum((s + 1) * math.log(s + 1) for s in d.counts)
        - nk * math.log(nk)
    )


def multinomial_log_ratio_closed(d: MultinomialDataset) -> float:
    """``log(p / p_LA)`` evaluated directly from the combined ratio formula."""
    nk = d.n + d.k
    per_category = sum(
        0.5 * math.log(s + 1) + log_gamma(s + 1) - (s + 1) * math.log(s + 1)
        for s in d.counts
    )
    return (
        0.5 * (1 - d.k) * _LOG_2PI
        - log_gamma(nk)
        - 0.5 * math.log(nk)
        + per_category
        + nk * math.log(nk)
    )


def multinomial_mode_closed(d: MultinomialDataset) -> np.ndarray:
    s = np.asarray(d.counts, dtype=float)
    return np.log((s[:-1] + 1.0) / (s[-1] + 1.0))


def multinomial_log_det_closed(d: MultinomialDataset) -> float:
    """``log |H|`` at the mode, ``prod(S_j + 1) / (n + k)``."""
    return sum(math.log(s + 1) for s in d.counts) - math.log(d.n + d.k)


def multinomial_log_prior(theta, k: int) -> float:
    """Density of the log-odds vector when ``psi`` is uniform on the simplex."""
    theta = np.asarray(theta, dtype=float)
    return log_gamma(k) + float(np.sum(theta)) - k * _log_partition(theta)


def multinomial_log_likelihood(d: MultinomialDataset, theta) -> float:
    theta = np.asarray(theta, dtype=float)
    s = np.asarray(d.counts[:-1], dtype=float)
    return float(s @ theta) - d.n * _log_partition(theta)


def multinomial_tau(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.exp(theta - _log_partition(theta))


def multinomial_objective(d: MultinomialDataset) -> Objective:
    k, nk = d.k, float(d.n + d.k)
    a = np.asarray(d.counts[:-1], dtype=float) + 1.0
    log_gamma_k = log_gamma(k)

    def value(theta):
        return log_gamma_k + float(a @ theta) - nk * _log_partition(theta)

    def gradient(theta):
        return a - nk * multinomial_tau(theta)

    def hessian(theta):
        tau = multinomial_tau(theta)
        return nk * (np.diag(tau) - np.outer(tau, tau))

    return Objective(
        dim=k - 1,
        eval=value,
        gradient=gradient,
        hessian=hessian,
        n=d.n,
        start=np.zeros(k - 1),
    )
