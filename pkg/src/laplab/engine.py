"""Generic k-dimensional Laplace approximation.

The approximation to ``int exp(f(theta)) d theta`` is

    (2 pi)^(k/2) |H|^(-1/2) exp(f(theta_hat)),

where ``theta_hat`` maximizes ``f`` and ``H = -d^2 f(theta_hat)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    DomainEscape,
    IndefiniteHessian,
    NonConvergence,
    NonPositiveDefinite,
)

_LOG_2PI = math.log(2.0 * math.pi)


def _always_inside(theta) -> bool:
    return True


@dataclass
class Objective:
    """A smooth log-objective together with its analytic derivatives.

    ``hessian`` returns the *negative* second derivative matrix ``H(theta)``,
    which is positive definite near a strict maximum.
    """

    dim: int
    eval: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    domain_check: Callable[[np.ndarray], bool] = _always_inside
    n: int = 1
    start: Optional[np.ndarray] = None


@dataclass
class SolverConfig:
    grad_tol: Optional[float] = None
    max_iterations: int = 200
    max_halvings: int = 50
    start: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.grad_tol is not None and not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.max_halvings < 0:
            raise ValueError("max_halvings must be non-negative")

    def tolerance_for(self, obj: Objective) -> float:
        if self.grad_tol is not None:
            return self.grad_tol
        return 1e-10 * max(1, obj.n)


@dataclass
class LaplaceResult:
    mode: np.ndarray
    log_det_hessian: float
    log_laplace: float
    iterations: int
    final_grad_norm: float
    log_peak: float = field(default=math.nan)


def log_det_spd(H) -> float:
    """Log-determinant of a symmetric positive-definite matrix via Cholesky."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    if H.shape[0] == 1:
        # fast path for the scalar models
        h = H[0, 0]
        if not h > 0:
            raise NonPositiveDefinite(f"non-positive pivot {h!r}")
        return math.log(h)
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError as exc:
        raise NonPositiveDefinite(str(exc)) from None
    diag = np.diag(L)
    if not np.all(diag > 0):
        raise NonPositiveDefinite("non-positive pivot in Cholesky factor")
    return float(2.0 * np.sum(np.log(diag)))


def _newton_direction(H, g):
    """Solve ``H d = g``; return None when ``H`` is not positive definite."""
    if H.shape[0] == 1:
        h = H[0, 0]
        return g / h if h > 0 else None
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        return None
    y = np.linalg.solve(L, g)
    return np.linalg.solve(L.T, y)


_ROUNDING = 8 * np.finfo(float).eps


def _line_search(obj, theta, f0, gnorm, direction, max_halvings):
    """Backtrack along ``direction`` until ``eval`` increases.

    Near the mode the gain ``g^2 / 2H`` drops below the rounding level of
    ``eval`` itself; a step that leaves ``eval`` unchanged to rounding is then
    accepted only if it shrinks the gradient.

    Returns ``(theta_new, f_new, in_domain_seen)``; ``theta_new`` is None when
    every halving failed.
    """
    step = 1.0
    in_domain_seen = False
    flat = _ROUNDING * max(1.0, abs(f0))
    for _ in range(max_halvings + 1):
        cand = theta + step * direction
        if obj.domain_check(cand):
            in_domain_seen = True
            f1 = obj.eval(cand)
            if f1 > f0:
                return cand, f1, True
            if f1 >= f0 - flat and np.max(np.abs(obj.gradient(cand))) < gnorm:
                return cand, f1, True
        step *= 0.5
    return None, f0, in_domain_seen


def find_mode(obj: Objective, cfg: Optional[SolverConfig] = None) -> tuple:
    """Maximize ``obj.eval`` by damped Newton iteration.

    Each iteration tries the Newton step first and halves it until the
    iterate stays in the domain and increases the objective. When the Hessian
    is not positive definite, or the Newton step cannot make progress, a
    gradient-ascent step (scaled by the largest diagonal curvature) is tried.

    Returns ``(mode, iterations, final_grad_norm)``.
    """
    cfg = cfg or SolverConfig()
    start = cfg.start if cfg.start is not None else obj.start
    if start is None:
        raise ValueError("no starting point supplied")
    theta = np.array(start, dtype=float).reshape(obj.dim)
    if not obj.domain_check(theta):
        raise DomainEscape(f"start point {theta.tolist()} is outside the domain")
    tol = cfg.tolerance_for(obj)

    f0 = obj.eval(theta)
    for it in range(cfg.max_iterations + 1):
        g = np.asarray(obj.gradient(theta), dtype=float)
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= tol:
            return theta, it, gnorm
        if it == cfg.max_iterations:
            break

        H = np.atleast_2d(np.asarray(obj.hessian(theta), dtype=float))
        d = _newton_direction(H, g)
        newton_ok = d is not None and float(g @ d) > 0
        domain_seen = False
        new = None
        if newton_ok:
            new, f1, domain_seen = _line_search(obj, theta, f0, gnorm, d, cfg.max_halvings)
        if new is None:
            curv = float(np.max(np.abs(np.diag(H))))
            ascent = g / curv if curv > 0 else g
            new, f1, seen = _line_search(obj, theta, f0, gnorm, ascent, cfg.max_halvings)
            domain_seen = domain_seen or seen
        if new is None:
            if not domain_seen:
                raise DomainEscape(f"no halved step stays in the domain at {theta.tolist()}")
            if not newton_ok:
                raise IndefiniteHessian(
                    f"Hessian not positive definite and gradient ascent stalled at {theta.tolist()}"
                )
            raise NonConvergence(
                f"line search stalled at {theta.tolist()} with |grad| = {gnorm:.3e} > {tol:.3e}"
            )
        theta, f0 = new, f1

    raise NonConvergence(
        f"no convergence after {cfg.max_iterations} iterations (|grad| = {gnorm:.3e})"
    )


def laplace_approximate(obj: Objective, cfg: Optional[SolverConfig] = None) -> LaplaceResult:
    mode, iterations, gnorm = find_mode(obj, cfg)
    log_det = log_det_spd(obj.hessian(mode))
    log_peak = float(obj.eval(mode))
    log_laplace = 0.5 * obj.dim * _LOG_2PI - 0.5 * log_det + log_peak
    return LaplaceResult(
        mode=mode,
        log_det_hessian=log_det,
        log_laplace=log_laplace,
        iterations=iterations,
        final_grad_norm=gnorm,
        log_peak=log_peak,
    )
