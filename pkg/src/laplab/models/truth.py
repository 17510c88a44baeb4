"""Data-generating distributions and samplers for the three models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import DomainError
from .bernoulli import BernoulliDataset
from .multinomial import MultinomialDataset
from .poisson import PoissonDataset

MODELS = ("bernoulli", "multinomial", "poisson")


@dataclass(frozen=True)
class TrueDistribution:
    """The sampling distribution ``P*_n`` for one model.

    Only the parameter matching ``model`` is used: ``theta_star`` in (0, 1)
    for Bernoulli, ``psi_star`` in the open simplex for multinomial,
    ``lambda_star > 0`` for Poisson.
    """

    model: str
    theta_star: Optional[float] = None
    psi_star: Optional[Tuple[float, ...]] = None
    lambda_star: Optional[float] = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise DomainError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.model == "bernoulli":
            if self.theta_star is None or not 0.0 < self.theta_star < 1.0:
                raise DomainError(f"theta_star must lie in (0, 1), got {self.theta_star!r}")
        elif self.model == "multinomial":
            if self.psi_star is None or len(self.psi_star) < 2:
                raise DomainError("psi_star needs at least two categories")
            psi = tuple(float(p) for p in self.psi_star)
            if min(psi) <= 0.0 or abs(sum(psi) - 1.0) > 1e-9:
                raise DomainError(f"psi_star must be a point in the open simplex, got {psi}")
            object.__setattr__(self, "psi_star", psi)
        else:
            if self.lambda_star is None or not self.lambda_star > 0.0:
                raise DomainError(f"lambda_star must be positive, got {self.lambda_star!r}")

    @property
    def k(self) -> int:
        return len(self.psi_star) if self.model == "multinomial" else 1

    def log_odds(self) -> np.ndarray:
        """Reparameterized multinomial truth ``log(psi_j / psi_k)``."""
        if self.model != "multinomial":
            raise DomainError("log-odds are defined for the multinomial model only")
        psi = np.asarray(self.psi_star)
        return np.log(psi[:-1] / psi[-1])

    def describe(self) -> str:
        if self.model == "bernoulli":
            return f"theta*={self.theta_star:g}"
        if self.model == "multinomial":
            return "psi*=(" + ",".join(f"{p:g}" for p in self.psi_star) + ")"
        return f"lambda*={self.lambda_star:g}"


def sample(dist: TrueDistribution, n: int, rng: np.random.Generator):
    """Draw ``n`` i.i.d. observations and reduce them to sufficient statistics."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if dist.model == "bernoulli":
        return BernoulliDataset(n=n, heads=int(rng.binomial(n, dist.theta_star)))
    if dist.model == "multinomial":
        return MultinomialDataset(tuple(int(c) for c in rng.multinomial(n, dist.psi_star)))
    return PoissonDataset(rng.poisson(dist.lambda_star, size=n))


def uniform_multinomial(k: int) -> TrueDistribution:
    return TrueDistribution("multinomial", psi_star=tuple([1.0 / k] * k))


def ball_radius(dist: TrueDistribution, theta: float = 1.0) -> float:
    """Default neighbourhood radius used by the regularity diagnostics."""
    if dist.model == "bernoulli":
        return min(dist.theta_star, 1.0 - dist.theta_star) / 2.0
    if dist.model == "poisson":
        return dist.lambda_star / (2.0 * theta)
    return 0.5


def ball_center(dist: TrueDistribution, theta: float = 1.0) -> np.ndarray:
    if dist.model == "bernoulli":
        return np.array([dist.theta_star])
    if dist.model == "poisson":
        return np.array([dist.lambda_star / theta])
    return dist.log_odds()

