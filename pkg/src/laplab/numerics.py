"""Log-domain arithmetic, Stirling brackets and finite-difference derivatives.

Everything here works in natural logarithms.
"""

from __future__ import annotations

import itertools
import math
import operator
from dataclasses import dataclass
from functools import reduce, total_ordering
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NonFinite

_LOG_2PI = math.log(2.0 * math.pi)


@total_ordering
@dataclass(frozen=True)
class LogValue:
    """A real number stored as ``sign * exp(log_abs)``.

    ``log_abs`` is ignored when ``sign == 0``.
    """

    sign: int
    log_abs: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or +1, got {self.sign!r}")

    @classmethod
    def from_real(cls, x: float) -> "LogValue":
        if x == 0:
            return cls(0, -math.inf)
        if math.isnan(x):
            raise DomainError("cannot represent nan")
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_log(cls, log_abs: float, sign: int = 1) -> "LogValue":
        return cls(sign, log_abs)

    def to_real(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)

    def __mul__(self, other: "LogValue") -> "LogValue":
        sign = self.sign * other.sign
        if sign == 0:
            return LogValue(0, -math.inf)
        return LogValue(sign, self.log_abs + other.log_abs)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogValue")
        if self.sign == 0:
            return LogValue(0, -math.inf)
        return LogValue(self.sign * other.sign, self.log_abs - other.log_abs)

    def __neg__(self) -> "LogValue":
        return LogValue(-self.sign, self.log_abs)

    def _key(self):
        if self.sign == 0:
            return (0, 0.0)
        return (self.sign, self.sign * self.log_abs)

    def __eq__(self, other):
        if not isinstance(other, LogValue):
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other: "LogValue") -> bool:
        if not isinstance(other, LogValue):
            return NotImplemented
        return self._key() < other._key()

    def __hash__(self):
        return hash(self._key())


@dataclass(frozen=True)
class RobbinsBracket:
    """Two-sided Stirling bracket ``lower < Gamma(q + 1) < upper``."""

    q: int
    lower: LogValue
    upper: LogValue


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for real ``x > 0``."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def log_stirling(q: int) -> float:
    """``log(sqrt(2 pi q) (q/e)^q)``, the common factor of both Robbins bounds."""
    return 0.5 * (_LOG_2PI + math.log(q)) + q * math.log(q) - q


def robbins_bracket(q: int) -> RobbinsBracket:
    try:
        q = operator.index(q)
    except TypeError:
        raise DomainError(f"q must be an integer, got {q!r}") from None
    if q < 1:
        raise DomainError(f"Robbins bracket requires q >= 1, got {q}")
    base = log_stirling(q)
    return RobbinsBracket(
        q=q,
        lower=LogValue(1, base + 1.0 / (12 * q + 1)),
        upper=LogValue(1, base + 1.0 / (12 * q)),
    )


def log_expm1_ratio(log_a: float, log_b: float) -> float:
    """Return ``a / b - 1`` given ``log a`` and ``log b``.

    Uses ``expm1`` so tiny relative differences keep their significant digits.
    """
    return math.expm1(log_a - log_b)


def log_sum_exp(values, axis=None):
    """Stable ``log(sum(exp(values)))``."""
    values = np.asarray(values, dtype=float)
    m = np.max(values, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.sum(np.exp(values - m), axis=axis, keepdims=True)) + m
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


# One-dimensional central stencils (offsets in units of h, weights), all
# second-order accurate.
_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}

# Roundoff grows like eps / h**order, so only low orders get a smaller step.
_STEP_SHRINK = {1: 0.1, 2: 0.5, 3: 1.0, 4: 1.0}

TRUNCATION_ORDER = 2


def fd_step(order: int, scale: float = 0.0) -> float:
    """Fixed finite-difference step used by :func:`central_difference`."""
    return max(1e-2, 0.1 * scale) * _STEP_SHRINK[order]


def central_difference(
    f: Callable,
    x: Sequence[float],
    order: int,
    indices: Sequence[int],
    scale: float = 0.0,
    batched: bool = False,
) -> float:
    """Estimate the mixed partial ``d^|indices| f / dx^indices`` at ``x``.

    Parameters
    ----------
    f : callable
        Scalar field. With ``batched=True`` it must map an ``(m, d)`` array of
        points to ``m`` values; otherwise it is called once per stencil point.
    x : sequence of float
        Evaluation point.
    order : int
        Total derivative order, 1 to 4. Must equal ``sum(indices)``.
    indices : sequence of int
        Multi-index, one entry per coordinate of ``x``.
    scale : float
        Characteristic length of ``x``; the step is
        ``max(1e-2, 0.1 * scale)`` times a fixed per-order shrink factor.

    The estimate is a tensor product of one-dimensional central stencils and
    has truncation error ``O(h**2)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    indices = tuple(int(i) for i in indices)
    if len(indices) != x.size:
        raise DomainError("multi-index length must match the dimension of x")
    if not 1 <= order <= 4 or sum(indices) != order or min(indices) < 0:
        raise DomainError(f"invalid derivative order {order} for multi-index {indices}")
    h = fd_step(order, scale)

    axes = [_STENCILS[a] for a in indices]
    offsets = np.array(list(itertools.product(*(o for o, _ in axes))), dtype=float)
    weights = np.array(
        [reduce(operator.mul, w, 1.0) for w in itertools.product(*(w for _, w in axes))]
    )
    points = x[None, :] + h * offsets
    if batched:
        values = np.asarray(f(points), dtype=float)
    else:
        values = np.array([f(p) for p in points], dtype=float)
    if not np.all(np.isfinite(values)):
        raise NonFinite(f"non-finite value on the stencil around {x.tolist()}")
    return float(np.dot(weights, values) / h**order)
