"""Independent numerical-integration check of the normalizing constants.

The log integrand is shifted by its value at the (closed-form) mode before
exponentiating, so the integral is O(1) regardless of n. Adaptive
Gauss-Kronrod cubature handles both the 1-D and the 2-D cases.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.integrate import cubature

from ..errors import DimensionTooLarge, DomainError, ToleranceNotMet
from ..numerics import log_gamma
from .bernoulli import BernoulliDataset
from .multinomial import MultinomialDataset
from .poisson import PoissonDataset

MAX_DIM = 2


def _bernoulli_integrand(d: BernoulliDataset):
    h, m = d.heads, d.tails
    peak = min(max(d.ybar, 0.0), 1.0)
    shift = 0.0
    if 0.0 < peak < 1.0:
        shift = h * math.log(peak) + m * math.log1p(-peak)

    def f(x):
        t = x[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            logf = np.where(h > 0, h * np.log(t), 0.0) + np.where(m > 0, m * np.log1p(-t), 0.0)
        return np.exp(logf - shift)

    return f, shift, [0.0], [1.0], None


def _poisson_integrand(d: PoissonDataset, theta: float):
    t, rate = d.total, d.n * theta + 1.0
    const = t * math.log(theta) - d.log_factorial_sum
    peak = t / rate
    shift = const + (t * math.log(peak) - peak * rate if t > 0 else 0.0)

    def f(x):
        w = x[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            logf = (t * np.log(w) if t > 0 else 0.0) - w * rate + const
        return np.exp(logf - shift)

    points = [np.array([peak])] if t > 0 else None
    return f, shift, [0.0], [np.inf], points


def _multinomial_integrand(d: MultinomialDataset):
    k, nk = d.k, float(d.n + d.k)
    a = np.asarray(d.counts[:-1], dtype=float) + 1.0
    lgk = log_gamma(k)

    def logpost(th):
        # log(1 + sum exp(theta)) with a zero column appended
        full = np.concatenate([np.zeros((th.shape[0], 1)), th], axis=1)
        m = full.max(axis=1, keepdims=True)
        lse = (m + np.log(np.exp(full - m).sum(axis=1, keepdims=True)))[:, 0]
        return lgk + th @ a - nk * lse

    s = np.asarray(d.counts, dtype=float)
    peak = np.log((s[:-1] + 1.0) / (s[-1] + 1.0))
    shift = float(logpost(peak[None, :])[0])

    def f(x):
        return np.exp(logpost(x) - shift)

    lo = [-np.inf] * (k - 1)
    hi = [np.inf] * (k - 1)
    return f, shift, lo, hi, None


def quadrature_oracle(model: str, dataset, theta: Optional[float] = None, rtol: float = 1e-8) -> float:
    """Log normalizing constant (or marginal likelihood) by adaptive cubature.

    Supports the Bernoulli and Poisson models and multinomial with ``k <= 3``.
    Raises :class:`ToleranceNotMet` if the subdivision budget runs out.
    """
    if model == "bernoulli":
        f, shift, lo, hi, points = _bernoulli_integrand(dataset)
    elif model == "poisson":
        if theta is None or not theta > 0:
            raise DomainError("the Poisson oracle needs theta > 0")
        f, shift, lo, hi, points = _poisson_integrand(dataset, theta)
    elif model == "multinomial":
        if dataset.k - 1 > MAX_DIM:
            raise DimensionTooLarge(f"quadrature oracle supports k <= {MAX_DIM + 1}, got k={dataset.k}")
        f, shift, lo, hi, points = _multinomial_integrand(dataset)
    else:
        raise DomainError(f"unknown model {model!r}")

    res = cubature(f, lo, hi, rtol=rtol, atol=0.0, points=points, max_subdivisions=20000)
    if res.status != "converged":
        raise ToleranceNotMet(
            f"{model} cubature stopped after {res.subdivisions} subdivisions "
            f"(estimate {res.estimate}, error {res.error})"
        )
    return float(math.log(float(res.estimate)) + shift)
