"""Almost-sure lower bounds on the relative error, with their applicability rules.

Every check compares the *signed* relative error ``p / p_LA - 1``: the coin
flip ratio sits below one, the multinomial and Poisson ratios above one.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

from .models.bernoulli import (
    BernoulliDataset,
    bernoulli_exact_log_z,
    bernoulli_log_laplace_closed,
)
from .models.multinomial import MultinomialDataset, multinomial_log_ratio_closed
from .models.poisson import PoissonDataset, poisson_log_ratio_closed
from .numerics import log_expm1_ratio

THEOREMS = ("T2", "T3", "T4", "T4-sharp")

# Absolute slack on the signed relative error, for rounding in the log ratio.
SLACK = 1e-12

DEFAULT_N_MIN_T2 = 14
DEFAULT_N_MIN_T3 = 20


@dataclass(frozen=True)
class BoundCheck:
    theorem: str
    applicable: bool
    bound_value: float
    observed_rel_error_signed: float
    satisfied: Optional[bool] = None

    def to_dict(self) -> dict:
        return asdict(self)


def _rel_error(log_ratio: float) -> float:
    return log_expm1_ratio(log_ratio, 0.0)


def check_bernoulli_t2(d: BernoulliDataset, n_min: int = DEFAULT_N_MIN_T2) -> BoundCheck:
    """Coin flips: ``p / p_LA <= 1 - 1/(26 n)`` once ``ybar`` is in (0.25, 0.75)."""
    bound = 1.0 / (26 * d.n)
    applicable = 0.25 < d.ybar < 0.75 and d.n >= n_min
    if d.degenerate:
        observed = math.nan
    else:
        observed = log_expm1_ratio(bernoulli_exact_log_z(d), bernoulli_log_laplace_closed(d))
    satisfied = (observed <= -bound + SLACK) if applicable else None
    return BoundCheck("T2", applicable, bound, observed, satisfied)


def check_multinomial_t3(d: MultinomialDataset, n_min: int = DEFAULT_N_MIN_T3) -> BoundCheck:
    """Log-odds multinomial: ``p / p_LA >= 1 + 1/(5 n)`` for ``n > 4(k - 1)``."""
    n = d.n
    bound = 1.0 / (5 * n) if n > 0 else math.inf
    applicable = n >= n_min and n > 4 * (d.k - 1)
    observed = _rel_error(multinomial_log_ratio_closed(d))
    satisfied = (observed >= bound - SLACK) if applicable else None
    return BoundCheck("T3", applicable, bound, observed, satisfied)


def check_poisson_t4(d: PoissonDataset, lambda_star: float) -> BoundCheck:
    """Poisson random effect: ``p / p_LA >= 1 + 1/(26 n lambda*)``.

    Applies when the total count exceeds one and ``ybar <= 2 lambda*``.
    """
    if not lambda_star > 0:
        raise ValueError(f"lambda_star must be positive, got {lambda_star!r}")
    bound = 1.0 / (26 * d.n * lambda_star)
    applicable = d.total > 1 and d.ybar <= 2 * lambda_star
    observed = math.nan if d.degenerate else _rel_error(poisson_log_ratio_closed(d))
    satisfied = (observed >= bound - SLACK) if applicable else None
    return BoundCheck("T4", applicable, bound, observed, satisfied)


def check_poisson_t4_sharp(d: PoissonDataset) -> BoundCheck:
    """Intermediate bound ``p / p_LA >= 1 + 1/(12 T + 1)`` for any total ``T >= 1``."""
    t = d.total
    bound = 1.0 / (12 * t + 1)
    applicable = t >= 1
    observed = math.nan if d.degenerate else _rel_error(poisson_log_ratio_closed(d))
    satisfied = (observed >= bound - SLACK) if applicable else None
    return BoundCheck("T4-sharp", applicable, bound, observed, satisfied)


def check_dataset(model: str, d, *, lambda_star: Optional[float] = None,
                  n_min_t2: int = DEFAULT_N_MIN_T2, n_min_t3: int = DEFAULT_N_MIN_T3) -> list:
    """All bound checks relevant to ``model``."""
    if model == "bernoulli":
        return [check_bernoulli_t2(d, n_min_t2)]
    if model == "multinomial":
        return [check_multinomial_t3(d, n_min_t3)]
    if model == "poisson":
        checks = [check_poisson_t4_sharp(d)]
        if lambda_star is not None:
            checks.insert(0, check_poisson_t4(d, lambda_star))
        return checks
    raise ValueError(f"unknown model {model!r}")


def floor_for(model: str, n: float, lambda_star: Optional[float] = None) -> float:
    """The theorem's floor on ``|p / p_LA - 1|`` at sample size ``n``."""
    if model == "bernoulli":
        return 1.0 / (26 * n)
    if model == "multinomial":
        return 1.0 / (5 * n)
    if lambda_star is None:
        raise ValueError("the Poisson floor needs lambda_star")
    return 1.0 / (26 * n * lambda_star)
