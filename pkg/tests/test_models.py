import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laplab.errors import DegenerateData, DomainError
from laplab.models import (
    BernoulliDataset,
    MultinomialDataset,
    PoissonDataset,
    TrueDistribution,
    ball_center,
    ball_radius,
    bernoulli_derivative,
    bernoulli_exact_log_z,
    bernoulli_log_laplace_closed,
    bernoulli_log_posterior,
    bernoulli_objective,
    multinomial_exact_log_z,
    multinomial_log_det_closed,
    multinomial_log_laplace_closed,
    multinomial_log_ratio_closed,
    multinomial_mode_closed,
    multinomial_objective,
    poisson_derivative,
    poisson_exact_log_marginal,
    poisson_joint_log,
    poisson_log_laplace_closed,
    poisson_log_ratio_closed,
    poisson_mode_closed,
    poisson_objective,
    sample,
    uniform_multinomial,
)
from laplab.numerics import central_difference

# Reference values below were computed by direct numerical integration at
# 30 significant digits (mpmath), independently of the closed forms.


# ---------------------------------------------------------------- Bernoulli

@pytest.mark.parametrize("n, heads, expected", [
    (2, 1, 1 / 6),
    (4, 2, 1 / 30),
    (14, 7, 1.9425019425e-5),
])
def test_bernoulli_exact(n, heads, expected):
    assert bernoulli_exact_log_z(BernoulliDataset(n, heads)) == pytest.approx(math.log(expected), abs=1e-10)


@pytest.mark.parametrize("n, heads, expected", [
    (2, 1, math.sqrt(math.pi) / 8),
    (4, 2, 0.0391660667911),
    (14, 7, 2.04444758817e-5),
])
def test_bernoulli_laplace_closed(n, heads, expected):
    assert bernoulli_log_laplace_closed(BernoulliDataset(n, heads)) == pytest.approx(
        math.log(expected), abs=1e-10)


@pytest.mark.parametrize("heads", [0, 5])
def test_bernoulli_degenerate(heads):
    d = BernoulliDataset(5, heads)
    assert d.degenerate
    with pytest.raises(DegenerateData):
        bernoulli_log_laplace_closed(d)


def test_bernoulli_dataset_validation():
    with pytest.raises(DomainError):
        BernoulliDataset(3, 4)
    with pytest.raises(DomainError):
        BernoulliDataset(0, 0)


def test_bernoulli_objective_examples():
    obj = bernoulli_objective(BernoulliDataset(10, 5))
    assert obj.gradient(np.array([0.5]))[0] == pytest.approx(0.0, abs=1e-12)
    obj4 = bernoulli_objective(BernoulliDataset(4, 2))
    assert obj4.hessian(np.array([0.5]))[0, 0] == pytest.approx(16.0)
    obj100 = bernoulli_objective(BernoulliDataset(100, 50))
    assert obj100.eval(np.array([0.5])) - obj100.eval(np.array([0.5])) == 0.0


@pytest.mark.parametrize("order", [1, 2, 3, 4])
@pytest.mark.parametrize("t", [0.07, 0.4, 0.93])
def test_bernoulli_derivative_against_mpmath(order, t):
    d = BernoulliDataset(40, 13)
    ref = mpmath.diff(lambda x: d.heads * mpmath.log(x) + d.tails * mpmath.log(1 - x), t, order)
    assert bernoulli_derivative(d, t, order) == pytest.approx(float(ref), rel=1e-10)


def test_bernoulli_fourth_derivative_has_factorial():
    # d^4/dt^4 [h log t] = -6 h / t^4
    d = BernoulliDataset(2, 1)
    assert bernoulli_derivative(d, 0.5, 4) == pytest.approx(-6 * 16 - 6 * 16)


# ---------------------------------------------------------------- multinomial

@pytest.mark.parametrize("counts, expected", [
    ((1, 1), math.log(1 / 6)),
    ((0, 0, 0), 0.0),
    ((3, 3), math.log(36 / 5040)),
])
def test_multinomial_exact(counts, expected):
    assert multinomial_exact_log_z(MultinomialDataset(counts)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("counts, expected", [
    ((1, 1), math.sqrt(2 * math.pi) / 16),
    ((2, 2), 0.0319789596233),
    ((4, 4), 1.54817472563e-3),
])
def test_multinomial_laplace_closed(counts, expected):
    assert multinomial_log_laplace_closed(MultinomialDataset(counts)) == pytest.approx(
        math.log(expected), abs=1e-10)


@pytest.mark.parametrize("counts, expected", [
    ((1, 1), 1.06384608107),
    ((4, 4), 1.02527289784),
    ((5, 3), 1.0266861008),
    ((3, 3), 1.03166095277),
])
def test_multinomial_ratio(counts, expected):
    assert math.exp(multinomial_log_ratio_closed(MultinomialDataset(counts))) == pytest.approx(
        expected, abs=1e-9)


def test_multinomial_objective_examples():
    obj = multinomial_objective(MultinomialDataset((1, 1)))
    assert obj.eval(np.zeros(1)) == pytest.approx(math.log(1 / 16), abs=1e-14)
    d = MultinomialDataset((5, 3, 2))
    mode = multinomial_mode_closed(d)
    assert np.max(np.abs(multinomial_objective(d).gradient(mode))) <= 1e-10
    det = np.linalg.det(multinomial_objective(d).hessian(mode))
    assert det == pytest.approx(72 / 13, rel=1e-12)
    assert multinomial_log_det_closed(d) == pytest.approx(math.log(72 / 13), abs=1e-12)


def test_multinomial_ratio_route_matches_difference():
    for counts in [(1, 1), (7, 0, 2), (0, 0, 0, 9), (30, 12, 5, 1, 2)]:
        d = MultinomialDataset(counts)
        direct = multinomial_log_ratio_closed(d)
        diff = multinomial_exact_log_z(d) - multinomial_log_laplace_closed(d)
        assert direct == pytest.approx(diff, abs=1e-11)


def test_multinomial_dataset_validation():
    with pytest.raises(DomainError):
        MultinomialDataset((3,))
    with pytest.raises(DomainError):
        MultinomialDataset((3, -1))


# ---------------------------------------------------------------- Poisson

def _pois(*ys):
    return PoissonDataset(np.array(ys))


def test_poisson_exact():
    assert poisson_exact_log_marginal(_pois(0, 1, 2), 1.0) == pytest.approx(math.log(3 / 256), abs=1e-12)
    for n in (1, 4, 9):
        zeros = PoissonDataset(np.zeros(n, dtype=int))
        assert poisson_exact_log_marginal(zeros, 1.0) == pytest.approx(-math.log(n + 1), abs=1e-12)


def test_poisson_laplace_and_ratio():
    d = _pois(0, 1, 2)
    assert math.exp(poisson_log_laplace_closed(d, 1.0)) == pytest.approx(0.0113988468581, rel=1e-10)
    assert math.exp(poisson_log_ratio_closed(d)) == pytest.approx(1.02806451792, abs=1e-10)
    assert math.exp(poisson_log_ratio_closed(_pois(1))) == pytest.approx(1.08443755142, abs=1e-10)
    assert poisson_log_ratio_closed(_pois(1)) == pytest.approx(1 - 0.5 * math.log(2 * math.pi), abs=1e-14)


def test_poisson_objective_examples():
    d = _pois(0, 1, 2)
    obj = poisson_objective(d, 1.0)
    assert obj.gradient(np.array([0.75]))[0] == pytest.approx(0.0, abs=1e-12)
    assert obj.hessian(np.array([0.75]))[0, 0] == pytest.approx(3 / 0.5625)
    assert poisson_mode_closed(d, 1.0) == pytest.approx(0.75)
    with pytest.raises(DegenerateData):
        poisson_objective(_pois(0, 0, 0), 1.0)


@pytest.mark.parametrize("order", [1, 2, 3, 4])
@pytest.mark.parametrize("w", [0.05, 1.1, 7.0])
def test_poisson_derivative_against_mpmath(order, w):
    d = _pois(3, 0, 4, 1, 2)
    theta = 2.0
    ref = mpmath.diff(lambda x: d.total * mpmath.log(theta * x) - (d.n * theta + 1) * x, w, order)
    assert poisson_derivative(d, theta, w, order) == pytest.approx(float(ref), rel=1e-10)
    assert poisson_joint_log(d, theta, w) - poisson_joint_log(d, theta, 1.0) == pytest.approx(
        d.total * math.log(w) - (d.n * theta + 1) * (w - 1.0), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 20), min_size=1, max_size=30).filter(lambda ys: sum(ys) > 0),
       st.floats(0.01, 100.0))
def test_poisson_ratio_is_theta_free(ys, theta):
    d = PoissonDataset(np.array(ys))
    lr = poisson_exact_log_marginal(d, theta) - poisson_log_laplace_closed(d, theta)
    assert lr == pytest.approx(poisson_log_ratio_closed(d), abs=1e-10)


def test_poisson_theta_validation():
    with pytest.raises(DomainError):
        poisson_exact_log_marginal(_pois(1, 2), 0.0)
    with pytest.raises(DomainError):
        PoissonDataset(np.array([1, -1]))


# ---------------------------------------------------------------- Objective invariants

def _objectives():
    yield bernoulli_objective(BernoulliDataset(30, 11)), lambda r: r.uniform(0.2, 0.8, 1)
    yield poisson_objective(_pois(2, 0, 5, 1), 1.5), lambda r: r.uniform(0.5, 4.0, 1)
    yield multinomial_objective(MultinomialDataset((4, 9, 2, 6))), lambda r: r.normal(size=3)


@pytest.mark.parametrize("idx", [0, 1, 2])
def test_gradient_and_hessian_consistent_with_eval(idx):
    # fixed FD steps (h >= 1e-3) keep these points away from the boundary
    obj, draw = list(_objectives())[idx]
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = draw(rng)
        g = obj.gradient(x)
        H = obj.hessian(x)
        assert np.allclose(H, H.T, rtol=1e-10, atol=0)
        for j in range(obj.dim):
            e = [0] * obj.dim
            e[j] = 1
            fd = central_difference(obj.eval, x, 1, e)
            # the absolute floor covers points where the gradient nearly vanishes
            assert g[j] == pytest.approx(fd, rel=1e-4, abs=1e-3)


# ---------------------------------------------------------------- truth and sampling

def test_sample_sanity_bands():
    rng = np.random.default_rng(123)
    d = sample(TrueDistribution("bernoulli", theta_star=0.5), 10**6, rng)
    assert abs(d.heads / d.n - 0.5) < 0.002
    p = sample(TrueDistribution("poisson", lambda_star=2.0), 10**5, rng)
    assert abs(p.ybar - 2.0) < 0.02
    m = sample(uniform_multinomial(3), 300, rng)
    assert m.k == 3 and m.n == 300


@pytest.mark.parametrize("kwargs", [
    dict(model="bernoulli", theta_star=1.0),
    dict(model="bernoulli", theta_star=0.0),
    dict(model="multinomial", psi_star=(0.5, 0.6)),
    dict(model="multinomial", psi_star=(1.0, 0.0)),
    dict(model="poisson", lambda_star=0.0),
    dict(model="gamma"),
])
def test_truth_validation(kwargs):
    with pytest.raises(DomainError):
        TrueDistribution(**kwargs)


def test_ball_geometry():
    assert ball_radius(TrueDistribution("bernoulli", theta_star=0.2)) == pytest.approx(0.1)
    t = TrueDistribution("poisson", lambda_star=3.0)
    assert ball_radius(t, 2.0) == pytest.approx(0.75)
    assert ball_center(t, 2.0)[0] == pytest.approx(1.5)
    m = TrueDistribution("multinomial", psi_star=(0.5, 0.25, 0.25))
    assert ball_center(m) == pytest.approx([math.log(2), 0.0])
