import math

import numpy as np
import pytest

from laplab.diagnostics import annulus_grid, ball_grid, consistency_sweep, diagnose
from laplab.errors import DimensionTooLarge, DomainError
from laplab.models import (
    BernoulliDataset,
    MultinomialDataset,
    PoissonDataset,
    TrueDistribution,
    uniform_multinomial,
)

HALF = TrueDistribution("bernoulli", theta_star=0.5)


def test_bernoulli_report():
    r = diagnose("bernoulli", BernoulliDataset(10**4, 5000), HALF)
    lo, hi = r.a2_eig_bounds
    assert lo <= 4.0 <= hi
    delta = 0.25
    assert r.delta == pytest.approx(delta)
    assert r.a3_outside_gap <= -(delta**2) / 8 * (1 - 0.2)
    assert r.a5_prior_bounds == (1.0, 1.0)
    assert r.a4_scaled_mode_dev["q50"] == pytest.approx(0.0, abs=1e-8)
    assert sorted(r.a1_sup_scaled_derivs) == [0, 1, 2, 3, 4]


def test_bernoulli_fourth_order_constant():
    # sup over the ball of |d^4 log p*| / n is bounded by 2 * 3! * (2 / min(theta*, 1 - theta*))^4
    r = diagnose("bernoulli", BernoulliDataset(10**4, 5000), HALF)
    assert r.a1_sup_scaled_derivs[4] <= 2 * 6 * (2 / 0.5) ** 4
    assert r.a1_sup_scaled_derivs[4] > 2 * (2 / 0.5) ** 4


def test_poisson_report():
    truth = TrueDistribution("poisson", lambda_star=2.0)
    rng = np.random.default_rng(3)
    d = PoissonDataset(rng.poisson(2.0, size=5000))
    r = diagnose("poisson", d, truth, theta=1.0)
    assert r.ball_center == [2.0]
    assert r.delta == pytest.approx(1.0)
    assert r.a2_eig_bounds[0] > 0
    assert r.a3_outside_gap < 0
    assert 0 < r.a5_prior_bounds[0] <= r.a5_prior_bounds[1] < 1


def test_multinomial_report_and_dimension_limit():
    truth = uniform_multinomial(3)
    r = diagnose("multinomial", MultinomialDataset((100, 100, 100)), truth, grid_points=5)
    assert r.a2_eig_bounds[0] > 0 and r.a3_outside_gap < 0
    assert r.a1_sup_scaled_derivs[1] >= 0
    with pytest.raises(DimensionTooLarge):
        diagnose("multinomial", MultinomialDataset((1,) * 5), uniform_multinomial(5))


def test_multinomial_second_derivatives_match_hessian():
    # at the truth with balanced data the FD second derivative equals -H/n
    truth = uniform_multinomial(2)
    r = diagnose("multinomial", MultinomialDataset((500, 500)), truth, grid_points=3, delta=1e-6)
    assert r.a1_sup_scaled_derivs[2] == pytest.approx(1002 / 4 / 1000, rel=1e-3)


def test_validation():
    d = BernoulliDataset(10, 5)
    with pytest.raises(DomainError):
        diagnose("poisson", d, HALF)
    with pytest.raises(DomainError):
        diagnose("bernoulli", d, HALF, grid_points=1)
    with pytest.raises(DomainError):
        diagnose("bernoulli", d, HALF, annulus_radius=0.1)


def test_grids():
    b = ball_grid([0.0, 0.0], 1.0, 5)
    assert np.all(np.linalg.norm(b, axis=1) <= 1 + 1e-12)
    a = annulus_grid([0.0, 0.0], 1.0, 2.0, 5)
    dist = np.linalg.norm(a, axis=1)
    assert np.all((dist >= 1 - 1e-12) & (dist <= 2 + 1e-12))
    assert len(ball_grid([0.3], 0.1, 7)) == 7


def test_consistency_sweep():
    rng = np.random.default_rng(11)
    sweep = consistency_sweep("bernoulli", HALF, [100, 10000], 200, rng)
    # sqrt(n) |theta_hat - theta*| is stochastically bounded; the median ratio stays O(1)
    assert 0.5 < sweep.median_ratio < 2.0
    assert set(sweep.quantiles) == {100, 10000}
    with pytest.raises(DomainError):
        consistency_sweep("bernoulli", HALF, [10], 50, rng)


def test_consistency_sweep_poisson_scale():
    # the limit of sqrt(n)(omega_hat - omega*) has standard deviation sqrt(lambda*) / theta
    lam = 4.0
    rng = np.random.default_rng(2)
    sweep = consistency_sweep("poisson", TrueDistribution("poisson", lambda_star=lam), [4000], 400, rng)
    expected_median = math.sqrt(lam) * 0.6745
    assert sweep.medians[4000] == pytest.approx(expected_median, rel=0.15)
