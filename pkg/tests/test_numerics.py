import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laplab.errors import DomainError, NonFinite
from laplab.numerics import (
    LogValue,
    central_difference,
    log_expm1_ratio,
    log_gamma,
    log_stirling,
    log_sum_exp,
    robbins_bracket,
)


# ---------------------------------------------------------------- log_gamma

@pytest.mark.parametrize("x, expected", [(1, 0.0), (2, 0.0), (11, math.log(3628800))])
def test_log_gamma_small_values(x, expected):
    assert log_gamma(x) == pytest.approx(expected, abs=1e-13)


def test_log_gamma_matches_factorial_table():
    for q in range(0, 171):
        assert log_gamma(q + 1) == pytest.approx(math.log(math.factorial(q)), rel=1e-14, abs=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, math.nan])
def test_log_gamma_rejects_nonpositive(x):
    with pytest.raises(DomainError):
        log_gamma(x)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e6))
def test_log_gamma_against_mpmath(x):
    assert log_gamma(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------- Robbins bracket

def test_robbins_q1():
    b = robbins_bracket(1)
    assert b.lower.to_real() == pytest.approx(0.9958702, abs=1e-6)
    assert b.upper.to_real() == pytest.approx(1.0022744, abs=1e-6)
    assert b.lower.log_abs < 0.0 < b.upper.log_abs


def test_robbins_q10():
    b = robbins_bracket(10)
    assert b.lower.to_real() == pytest.approx(3628560.14, rel=1e-8)
    assert b.upper.to_real() == pytest.approx(3628810.05, rel=1e-8)
    assert b.lower.to_real() < 3628800 < b.upper.to_real()


@pytest.mark.parametrize("q", [0, -3, 2.5])
def test_robbins_domain(q):
    with pytest.raises(DomainError):
        robbins_bracket(q)


def test_log_stirling_is_bracket_base():
    b = robbins_bracket(7)
    assert b.lower.log_abs == pytest.approx(log_stirling(7) + 1 / 85)
    assert b.upper.log_abs == pytest.approx(log_stirling(7) + 1 / 84)


# ---------------------------------------------------------------- log_expm1_ratio

def test_log_expm1_ratio_examples():
    assert log_expm1_ratio(0.0, 0.0) == 0.0
    assert log_expm1_ratio(math.log(2), 0.0) == pytest.approx(1.0, rel=1e-15)
    assert log_expm1_ratio(1e-8, 0.0) == pytest.approx(1.000000005e-8, rel=1e-12)


@settings(max_examples=200)
@given(st.floats(-50, 50), st.floats(-50, 50))
def test_log_expm1_ratio_matches_direct(a, b):
    expected = float(mpmath.expm1(mpmath.mpf(a) - mpmath.mpf(b)))
    assert log_expm1_ratio(a, b) == pytest.approx(expected, rel=1e-13, abs=1e-300)


# ---------------------------------------------------------------- LogValue, log_sum_exp

def test_logvalue_roundtrip_and_arithmetic():
    a, b = LogValue.from_real(-3.0), LogValue.from_real(0.5)
    assert (a * b).to_real() == pytest.approx(-1.5)
    assert (a / b).to_real() == pytest.approx(-6.0)
    assert (-a).to_real() == pytest.approx(3.0)
    assert LogValue.from_real(0.0).sign == 0
    assert a < LogValue.from_real(0.0) < b
    assert LogValue.from_log(1e5).log_abs == 1e5


def test_log_sum_exp_stable():
    assert log_sum_exp([1000.0, 1000.0]) == pytest.approx(1000 + math.log(2))
    assert log_sum_exp([-math.inf, 0.0]) == pytest.approx(0.0)
    assert np.allclose(log_sum_exp(np.zeros((2, 3)), axis=1), math.log(3))


# ---------------------------------------------------------------- central differences

def test_central_difference_quadratic():
    assert central_difference(lambda x: x[0] ** 2, [1.0], 2, (2,)) == pytest.approx(2.0, abs=1e-6)


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_central_difference_constant(order):
    assert abs(central_difference(lambda x: 7.0, [0.3], order, (order,))) <= 1e-8


def test_central_difference_bernoulli_hessian():
    n, h = 100, 50

    def f(x):
        t = x[0]
        return h * math.log(t) + (n - h) * math.log(1 - t)

    assert central_difference(f, [0.5], 2, (2,)) == pytest.approx(-400.0, rel=1e-3)


def test_central_difference_mixed_partial_batched():
    def f(pts):
        pts = np.atleast_2d(pts)
        return pts[:, 0] ** 2 * pts[:, 1] ** 2

    assert central_difference(f, [1.0, 2.0], 4, (2, 2), batched=True) == pytest.approx(4.0, abs=1e-6)
    assert central_difference(f, [1.0, 2.0], 2, (1, 1), batched=True) == pytest.approx(8.0, rel=1e-4)


def test_central_difference_errors():
    with pytest.raises(DomainError):
        central_difference(lambda x: 0.0, [0.0], 2, (1,))
    with pytest.raises(DomainError):
        central_difference(lambda x: 0.0, [0.0, 0.0], 1, (1,))
    with pytest.raises(NonFinite):
        central_difference(lambda x: math.log(x[0]) if x[0] > 0 else math.nan, [0.0], 1, (1,))
