"""Finite-n plug-in versions of the regularity conditions behind the O(1/n) rate.

The conditions are limits in probability and cannot be computed; instead each
report evaluates, for one dataset, the quantity each condition bounds:

* A1: sup over a ball around the truth of ``|d^a log p*(theta)| / n``, orders 0..4
* A2: extreme eigenvalues of ``H_n(theta) / n`` over the ball
* A3: sup of ``(l_n(theta) - l_n(theta*)) / n`` over an annulus outside the ball
* A4: ``sqrt(n) * |theta_hat - theta*|``
* A5: range of the prior density over the ball

A3 only looks at the annulus ``delta <= |theta - theta*| <= radius``. All
three log-likelihoods are concave in their parameter, so once the maximizer
lies inside the ball the gap keeps falling along every ray past the annulus.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .engine import find_mode
from .errors import DimensionTooLarge, DomainError, LaplabError
from .models import (
    TrueDistribution,
    ball_center,
    ball_radius,
    bernoulli_derivative,
    bernoulli_log_posterior,
    bernoulli_objective,
    multinomial_log_likelihood,
    multinomial_log_prior,
    multinomial_objective,
    poisson_conditional_log_likelihood,
    poisson_derivative,
    poisson_joint_log,
    poisson_objective,
    sample,
)
from .models.multinomial import multinomial_tau
from .numerics import central_difference

MAX_MULTINOMIAL_K = 4
QUANTILES = (0.1, 0.5, 0.9)


@dataclass
class AssumptionReport:
    model: str
    n: int
    ball_center: list
    delta: float
    annulus_radius: float
    grid_points: int
    a1_sup_scaled_derivs: Dict[int, float]
    a2_eig_bounds: Tuple[float, float]
    a3_outside_gap: float
    a4_scaled_mode_dev: Dict[str, float]
    a5_prior_bounds: Tuple[float, float]


@dataclass
class ConsistencySweep:
    model: str
    n_grid: list
    reps: int
    quantiles: Dict[int, Dict[str, float]] = field(default_factory=dict)
    medians: Dict[int, float] = field(default_factory=dict)
    median_ratio: float = math.nan
    excluded: int = 0


def ball_grid(center, delta: float, grid_points: int) -> np.ndarray:
    """Uniform grid over the closed ball, ``grid_points`` per dimension."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    axis = np.linspace(-delta, delta, grid_points)
    if center.size == 1:
        return (center[0] + axis)[:, None]
    pts = np.array(list(itertools.product(axis, repeat=center.size)))
    keep = np.linalg.norm(pts, axis=1) <= delta * (1 + 1e-12)
    return center[None, :] + pts[keep]


def annulus_grid(center, inner: float, outer: float, grid_points: int) -> np.ndarray:
    """Grid points with ``inner <= |x - center| <= outer``."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.size == 1:
        r = np.linspace(inner, outer, grid_points)
        return np.concatenate([center[0] - r[::-1], center[0] + r])[:, None]
    axis = np.linspace(-outer, outer, 2 * grid_points - 1)
    pts = np.array(list(itertools.product(axis, repeat=center.size)))
    dist = np.linalg.norm(pts, axis=1)
    keep = (dist >= inner * (1 - 1e-12)) & (dist <= outer * (1 + 1e-12))
    # make sure the inner sphere itself is sampled along every axis
    axes = np.concatenate([np.eye(center.size), -np.eye(center.size)]) * inner
    return center[None, :] + np.concatenate([pts[keep], axes])


def _multi_indices(dim: int, order: int):
    for combo in itertools.combinations_with_replacement(range(dim), order):
        idx = [0] * dim
        for c in combo:
            idx[c] += 1
        yield tuple(idx)


def _quantile_dict(values) -> Dict[str, float]:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return {f"q{int(q * 100)}": math.nan for q in QUANTILES}
    return {f"q{int(q * 100)}": float(np.quantile(values, q)) for q in QUANTILES}


def _mode_and_truth(model, dataset, truth, theta):
    if model == "bernoulli":
        obj = bernoulli_objective(dataset)
    elif model == "multinomial":
        obj = multinomial_objective(dataset)
    else:
        obj = poisson_objective(dataset, theta)
    mode, _, _ = find_mode(obj)
    return mode, ball_center(truth, theta)


def scaled_mode_deviation(model, dataset, truth, theta: float = 1.0) -> float:
    mode, center = _mode_and_truth(model, dataset, truth, theta)
    n = dataset.n
    return float(math.sqrt(n) * np.linalg.norm(mode - center))


def diagnose(
    model: str,
    dataset,
    truth: TrueDistribution,
    grid_points: int = 11,
    annulus_radius: Optional[float] = None,
    *,
    theta: float = 1.0,
    delta: Optional[float] = None,
    mode_deviations: Optional[Sequence[float]] = None,
) -> AssumptionReport:
    """Evaluate the A1-A5 surrogates for one dataset.

    ``delta`` defaults to ``min(theta*, 1 - theta*) / 2`` for coin flips,
    ``lambda* / (2 theta)`` for the Poisson latent effect and 0.5 (in log-odds
    units) for the multinomial; ``annulus_radius`` defaults to ``5 * delta``.
    ``mode_deviations`` (e.g. from :func:`consistency_sweep`) replaces the
    single-dataset value in the A4 quantiles.
    """
    if truth.model != model:
        raise DomainError(f"truth is for {truth.model!r}, dataset for {model!r}")
    if grid_points < 2:
        raise DomainError("grid_points must be at least 2")
    if model == "multinomial" and dataset.k > MAX_MULTINOMIAL_K:
        raise DimensionTooLarge(
            f"multinomial diagnostics support k <= {MAX_MULTINOMIAL_K}, got k={dataset.k}"
        )
    delta = ball_radius(truth, theta) if delta is None else float(delta)
    if not delta > 0:
        raise DomainError("delta must be positive")
    radius = 5.0 * delta if annulus_radius is None else float(annulus_radius)
    if radius <= delta:
        raise DomainError("annulus_radius must exceed delta")
    n = dataset.n
    center = ball_center(truth, theta)
    ball = ball_grid(center, delta, grid_points)
    ring = annulus_grid(center, delta, radius, grid_points)

    if model == "bernoulli":
        ball = ball[(ball[:, 0] > 0) & (ball[:, 0] < 1)]
        ring = ring[(ring[:, 0] > 0) & (ring[:, 0] < 1)]
        ts = ball[:, 0]
        a1 = {0: max(abs(bernoulli_log_posterior(dataset, t)) for t in ts) / n}
        for order in range(1, 5):
            a1[order] = max(abs(bernoulli_derivative(dataset, t, order)) for t in ts) / n
        curv = [dataset.heads / t**2 + dataset.tails / (1 - t) ** 2 for t in ts]
        a2 = (min(curv) / n, max(curv) / n)
        # the prior is flat, so the log likelihood equals the log posterior
        base = bernoulli_log_posterior(dataset, center[0])
        a3 = max(bernoulli_log_posterior(dataset, t) - base for t in ring[:, 0]) / n
        a5 = (1.0, 1.0)

    elif model == "poisson":
        ball = ball[ball[:, 0] > 0]
        ring = ring[ring[:, 0] > 0]
        ws = ball[:, 0]
        a1 = {0: max(abs(poisson_joint_log(dataset, theta, w)) for w in ws) / n}
        for order in range(1, 5):
            a1[order] = max(abs(poisson_derivative(dataset, theta, w, order)) for w in ws) / n
        curv = [dataset.total / w**2 for w in ws]
        a2 = (min(curv) / n, max(curv) / n)
        base = poisson_conditional_log_likelihood(dataset, theta, center[0])
        a3 = max(poisson_conditional_log_likelihood(dataset, theta, w) - base for w in ring[:, 0]) / n
        dens = np.exp(-ws)
        a5 = (float(dens.min()), float(dens.max()))

    elif model == "multinomial":
        obj = multinomial_objective(dataset)
        dim = obj.dim

        def batched(points):
            return np.array([obj.eval(p) for p in points])

        a1 = {0: max(abs(obj.eval(p)) for p in ball) / n}
        for order in range(1, 5):
            sup = 0.0
            for idx in _multi_indices(dim, order):
                for p in ball:
                    sup = max(sup, abs(central_difference(batched, p, order, idx, batched=True)))
            a1[order] = sup / n
        eig_lo, eig_hi = math.inf, -math.inf
        for p in ball:
            tau = multinomial_tau(p)
            H = (n + dataset.k) * (np.diag(tau) - np.outer(tau, tau))
            ev = np.linalg.eigvalsh(H)
            eig_lo, eig_hi = min(eig_lo, ev[0]), max(eig_hi, ev[-1])
        a2 = (eig_lo / n, eig_hi / n)
        base = multinomial_log_likelihood(dataset, center)
        a3 = max(multinomial_log_likelihood(dataset, p) - base for p in ring) / n
        dens = np.exp([multinomial_log_prior(p, dataset.k) for p in ball])
        a5 = (float(dens.min()), float(dens.max()))
    else:
        raise DomainError(f"unknown model {model!r}")

    if len(ball) == 0 or len(ring) == 0:
        raise DomainError("the diagnostic grids are empty; shrink delta or the annulus")

    if mode_deviations is None:
        mode_deviations = [scaled_mode_deviation(model, dataset, truth, theta)]

    return AssumptionReport(
        model=model,
        n=n,
        ball_center=[float(c) for c in center],
        delta=delta,
        annulus_radius=radius,
        grid_points=grid_points,
        a1_sup_scaled_derivs={k: float(v) for k, v in a1.items()},
        a2_eig_bounds=(float(a2[0]), float(a2[1])),
        a3_outside_gap=float(a3),
        a4_scaled_mode_dev=_quantile_dict(mode_deviations),
        a5_prior_bounds=a5,
    )


def consistency_sweep(
    model: str,
    truth: TrueDistribution,
    n_grid: Sequence[int],
    reps: int,
    rng: np.random.Generator,
    *,
    theta: float = 1.0,
) -> ConsistencySweep:
    """Quantiles of ``sqrt(n) |theta_hat - theta*|`` across replicates, per n.

    Degenerate datasets and solver failures are skipped and counted.
    """
    if reps < 100:
        raise DomainError("consistency_sweep needs reps >= 100")
    grid = sorted(int(n) for n in n_grid)
    out = ConsistencySweep(model=model, n_grid=grid, reps=reps)
    for n in grid:
        devs = []
        for _ in range(reps):
            d = sample(truth, n, rng)
            if d.degenerate:
                out.excluded += 1
                continue
            try:
                devs.append(scaled_mode_deviation(model, d, truth, theta))
            except LaplabError:
                out.excluded += 1
        out.quantiles[n] = _quantile_dict(devs)
        out.medians[n] = float(np.median(devs)) if devs else math.nan
    out.median_ratio = out.medians[grid[-1]] / out.medians[grid[0]]
    return out
