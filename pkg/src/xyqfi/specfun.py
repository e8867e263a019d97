"""Special functions and signed log-domain arithmetic.

The polygamma routine covers orders 1 to 3 on the positive real axis, which is
all that the polaron decay factor and its temperature derivatives need. The
``SignedLog`` type keeps products of many ``2cosh``/``2sinh`` factors finite for
long chains at low temperature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "SignedLog",
    "polygamma",
    "signed_log",
    "signed_log_product",
    "signed_log_sum",
    "log_2cosh",
    "log_abs_2sinh",
]

# Bernoulli numbers B_2 .. B_20.
_BERNOULLI_EVEN = (
    Fraction(1, 6),
    Fraction(-1, 30),
    Fraction(1, 42),
    Fraction(-1, 30),
    Fraction(5, 66),
    Fraction(-691, 2730),
    Fraction(7, 6),
    Fraction(-3617, 510),
    Fraction(43867, 798),
    Fraction(-174611, 330),
)

_SHIFT_THRESHOLD = 10.0
_SUPPORTED_ORDERS = (1, 2, 3)


def _asymptotic_coefficients(order: int) -> tuple[float, ...]:
    # coefficient of x^-(2k+order) for k = 1..10
    return tuple(
        float(b * Fraction(math.factorial(2 * k + order - 1), math.factorial(2 * k)))
        for k, b in enumerate(_BERNOULLI_EVEN, start=1)
    )


_ASYMPTOTIC = {n: _asymptotic_coefficients(n) for n in _SUPPORTED_ORDERS}


def polygamma(order: int, x):
    """Polygamma function of order 1, 2 or 3 for positive real ``x``.

    Arguments below 10 are shifted upward with
    ``psi_n(x) = psi_n(x + 1) + (-1)**(n + 1) * n! / x**(n + 1)``; the shifted value
    is evaluated with the asymptotic Bernoulli series truncated after B_20.
    Accepts scalars or numpy arrays.
    """
    if order not in _SUPPORTED_ORDERS:
        raise ParameterError(f"polygamma order must be one of {_SUPPORTED_ORDERS}, got {order!r}")
    scalar = np.ndim(x) == 0
    arg = np.array(x, dtype=float, ndmin=1, copy=True)
    if np.any(~(arg > 0)):
        raise DomainError("polygamma requires x > 0")

    sign = -1.0 if order % 2 == 0 else 1.0
    n_fact = math.factorial(order)
    acc = np.zeros_like(arg)
    low = arg < _SHIFT_THRESHOLD
    while np.any(low):
        acc[low] += sign * n_fact / arg[low] ** (order + 1)
        arg[low] += 1.0
        low = arg < _SHIFT_THRESHOLD

    inv = 1.0 / arg
    inv2 = inv * inv
    # Horner evaluation of sum_k c_k x^(-2k), smallest terms first.
    series = np.zeros_like(arg)
    for c in reversed(_ASYMPTOTIC[order]):
        series = (series + c) * inv2
    head = math.factorial(order - 1) + 0.5 * n_fact * inv
    tail = sign * inv**order * (head + series)
    out = acc + tail
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class SignedLog:
    """A real number stored as ``sign * exp(log_mag)``; zero is ``(-inf, 0)``."""

    log_mag: float
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ParameterError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if (self.sign == 0) != (self.log_mag == -math.inf):
            raise ParameterError("zero must be represented as (log_mag=-inf, sign=0)")

    @classmethod
    def zero(cls) -> SignedLog:
        return cls(-math.inf, 0)

    @classmethod
    def one(cls) -> SignedLog:
        return cls(0.0, 1)

    def to_float(self) -> float:
        return self.sign * math.exp(self.log_mag) if self.sign else 0.0

    def __mul__(self, other: SignedLog) -> SignedLog:
        return signed_log_product([self, other])

    def __neg__(self) -> SignedLog:
        return SignedLog(self.log_mag, -self.sign)


def signed_log(x: float) -> SignedLog:
    """Encode a finite real number."""
    if x == 0:
        return SignedLog.zero()
    return SignedLog(math.log(abs(x)), 1 if x > 0 else -1)


def signed_log_product(factors: Iterable[SignedLog]) -> SignedLog:
    """Product of signed logs: signs multiply, magnitudes add, any zero wins."""
    log_mag = 0.0
    sign = 1
    for f in factors:
        if f.sign == 0:
            return SignedLog.zero()
        log_mag += f.log_mag
        sign *= f.sign
    return SignedLog(log_mag, sign)


def signed_log_sum(terms: Iterable[SignedLog]) -> SignedLog:
    """Signed log-sum-exp anchored at the largest magnitude.

    Terms are accumulated in order of decreasing magnitude so that the result
    does not depend on the order of the input.
    """
    live = sorted((t for t in terms if t.sign != 0), key=lambda t: -t.log_mag)
    if not live:
        return SignedLog.zero()
    anchor = live[0].log_mag
    scaled = [t.sign * math.exp(t.log_mag - anchor) for t in live]
    total = math.fsum(scaled)
    if total == 0.0:
        return SignedLog.zero()
    return SignedLog(anchor + math.log(abs(total)), 1 if total > 0 else -1)


def log_2cosh(y):
    """``ln(2 cosh y)`` without overflow; array friendly."""
    a = np.abs(y)
    return a + np.log1p(np.exp(-2.0 * a))


def log_abs_2sinh(y):
    """``(ln|2 sinh y|, sign(y))``; ``-inf`` and sign 0 at ``y = 0``."""
    a = np.abs(y)
    with np.errstate(divide="ignore"):
        mag = a + np.log(-np.expm1(-2.0 * a))
    return mag, np.sign(y).astype(int) if np.ndim(y) else int(np.sign(y))
