"""Coin flips with a uniform prior on the success probability."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..engine import Objective
from ..errors import DegenerateData, DomainError
from ..numerics import log_gamma

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class BernoulliDataset:
    n: int
    heads: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be positive, got {self.n}")
        if not 0 <= self.heads <= self.n:
            raise DomainError(f"heads must lie in [0, {self.n}], got {self.heads}")

    @property
    def tails(self) -> int:
        return self.n - self.heads

    @property
    def ybar(self) -> float:
        return self.heads / self.n

    @property
    def zbar(self) -> float:
        return self.tails / self.n

    @property
    def degenerate(self) -> bool:
        return self.heads in (0, self.n)


def _require_interior(d: BernoulliDataset) -> None:
    if d.degenerate:
        raise DegenerateData(
            f"heads={d.heads} of n={d.n} puts the mode on the boundary of (0, 1)"
        )


def bernoulli_exact_log_z(d: BernoulliDataset) -> float:
    """``log B(heads + 1, tails + 1)``, the evidence under the uniform prior."""
    return log_gamma(d.heads + 1) + log_gamma(d.tails + 1) - log_gamma(d.n + 2)


def bernoulli_log_laplace_closed(d: BernoulliDataset) -> float:
    _require_interior(d)
    return (
        0.5 * (_LOG_2PI - math.log(d.n))
        + (d.heads + 0.5) * math.log(d.ybar)
        + (d.tails + 0.5) * math.log(d.zbar)
    )


def bernoulli_log_ratio_closed(d: BernoulliDataset) -> float:
    return bernoulli_exact_log_z(d) - bernoulli_log_laplace_closed(d)


def bernoulli_mode_closed(d: BernoulliDataset) -> float:
    return d.ybar


def bernoulli_log_posterior(d: BernoulliDataset, theta: float) -> float:
    return d.heads * math.log(theta) + d.tails * math.log1p(-theta)


def bernoulli_derivative(d: BernoulliDataset, theta: float, order: int) -> float:
    """``order``-th derivative of the log posterior in ``theta`` (order >= 1)."""
    if order < 1:
        raise DomainError("order must be at least 1")
    c = math.factorial(order - 1)
    return (-1) ** (order - 1) * c * d.heads / theta**order - c * d.tails / (1.0 - theta) ** order


def bernoulli_objective(d: BernoulliDataset) -> Objective:
    _require_interior(d)
    h, m = float(d.heads), float(d.tails)

    def value(theta):
        t = theta[0]
        return h * math.log(t) + m * math.log1p(-t)

    def gradient(theta):
        t = theta[0]
        return np.array([h / t - m / (1.0 - t)])

    def hessian(theta):
        t = theta[0]
        return np.array([[h / (t * t) + m / ((1.0 - t) * (1.0 - t))]])

    def inside(theta):
        return 0.0 < theta[0] < 1.0

    start = min(max(d.ybar, 0.05), 0.95)
    return Objective(
        dim=1,
        eval=value,
        gradient=gradient,
        hessian=hessian,
        domain_check=inside,
        n=d.n,
        start=np.array([start]),
    )
