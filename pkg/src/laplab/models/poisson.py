"""Poisson counts with a shared Gamma(1, 1) random effect.

``Y_i | omega ~ Pois(omega * theta)`` with ``theta > 0`` a fixed parameter; the
latent ``omega`` is integrated out to give the marginal likelihood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..engine import Objective
from ..errors import DegenerateData, DomainError
from ..numerics import log_gamma

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class PoissonDataset:
    counts: np.ndarray
    total: int = field(init=False)
    log_factorial_sum: float = field(init=False)

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or counts.size < 1:
            raise DomainError("Poisson counts must be a non-empty vector")
        if not np.all(counts == np.floor(counts)) or np.any(counts < 0):
            raise DomainError("Poisson counts must be non-negative integers")
        counts = counts.astype(np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "total", int(counts.sum()))
        # sum of log(Y_i!) grouped by distinct value
        tally = np.bincount(counts)
        lf = sum(int(c) * log_gamma(v + 1) for v, c in enumerate(tally) if c)
        object.__setattr__(self, "log_factorial_sum", float(lf))

    @property
    def n(self) -> int:
        return int(self.counts.size)

    @property
    def ybar(self) -> float:
        return self.total / self.n

    @property
    def degenerate(self) -> bool:
        return self.total == 0


def _check_theta(theta: float) -> None:
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta!r}")


def _require_events(d: PoissonDataset) -> None:
    if d.degenerate:
        raise DegenerateData("all counts are zero; the latent mode is on the boundary")


def _shared_terms(d: PoissonDataset, theta: float) -> float:
    """Terms common to the exact and approximate marginal likelihoods."""
    return -d.log_factorial_sum + d.total * math.log(theta) - (d.total + 1) * math.log(d.n * theta + 1)


def poisson_exact_log_marginal(d: PoissonDataset, theta: float) -> float:
    _check_theta(theta)
    return log_gamma(d.total + 1) + _shared_terms(d, theta)


def poisson_log_laplace_closed(d: PoissonDataset, theta: float) -> float:
    _check_theta(theta)
    _require_events(d)
    t = d.total
    return 0.5 * _LOG_2PI + (t + 0.5) * math.log(t) - t + _shared_terms(d, theta)


def poisson_log_ratio_closed(d: PoissonDataset) -> float:
    """``log(p / p_LA)``; depends on the data only through the total count."""
    _require_events(d)
    t = d.total
    return log_gamma(t + 1) - 0.5 * _LOG_2PI - (t + 0.5) * math.log(t) + t


def poisson_mode_closed(d: PoissonDataset, theta: float) -> float:
    return d.total / (d.n * theta + 1)


def poisson_joint_log(d: PoissonDataset, theta: float, omega: float) -> float:
    """``log p(Y, omega; theta)`` including the Gamma(1, 1) latent density."""
    return d.total * math.log(omega * theta) - omega * (d.n * theta + 1) - d.log_factorial_sum


def poisson_conditional_log_likelihood(d: PoissonDataset, theta: float, omega: float) -> float:
    """``log p(Y | omega; theta)`` without the latent density."""
    return d.total * math.log(omega * theta) - omega * d.n * theta - d.log_factorial_sum


def poisson_derivative(d: PoissonDataset, theta: float, omega: float, order: int) -> float:
    """``order``-th derivative of the joint log likelihood in ``omega``."""
    if order < 1:
        raise DomainError("order must be at least 1")
    base = (-1) ** (order - 1) * math.factorial(order - 1) * d.total / omega**order
    if order == 1:
        return base - (d.n * theta + 1)
    return base


def poisson_objective(d: PoissonDataset, theta: float) -> Objective:
    _check_theta(theta)
    _require_events(d)
    t = float(d.total)
    rate = d.n * theta + 1.0
    const = t * math.log(theta) - d.log_factorial_sum

    def value(omega):
        w = omega[0]
        return t * math.log(w) - w * rate + const

    def gradient(omega):
        return np.array([t / omega[0] - rate])

    def hessian(omega):
        w = omega[0]
        return np.array([[t / (w * w)]])

    def inside(omega):
        return omega[0] > 0.0

    return Objective(
        dim=1,
        eval=value,
        gradient=gradient,
        hessian=hessian,
        domain_check=inside,
        n=d.n,
        start=np.array([max(d.ybar, 1e-3)]),
    )
