"""Second-order forward-mode jets.

A :class:`Jet2` carries a value together with its first and second derivative
with respect to one active parameter. Fields may be floats or numpy arrays of a
common shape, which lets a whole set of momentum modes flow through the same
arithmetic at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, SingularityError
from .specfun import polygamma

__all__ = [
    "Jet2",
    "lift",
    "atan2",
    "exp",
    "log",
    "sqrt",
    "sin",
    "cos",
    "sinh",
    "cosh",
    "hypot",
    "trigamma",
    "jet_polygamma",
]

Real = Union[float, np.ndarray]


@dataclass(frozen=True, eq=False)
class Jet2:
    """Truncated Taylor triple ``(v, d1, d2)``."""

    v: Real
    d1: Real = 0.0
    d2: Real = 0.0

    # let numpy hand mixed ndarray/Jet2 arithmetic back to the jet
    __array_ufunc__ = None

    @classmethod
    def constant(cls, value: Real) -> Jet2:
        return cls(value, np.zeros_like(value, dtype=float) if np.ndim(value) else 0.0,
                   np.zeros_like(value, dtype=float) if np.ndim(value) else 0.0)

    @classmethod
    def variable(cls, value: float) -> Jet2:
        return cls(float(value), 1.0, 0.0)

    def __repr__(self) -> str:
        return f"Jet2(v={self.v!r}, d1={self.d1!r}, d2={self.d2!r})"

    def __getitem__(self, idx) -> Jet2:
        return Jet2(np.asarray(self.v)[idx], np.broadcast_to(self.d1, np.shape(self.v))[idx],
                    np.broadcast_to(self.d2, np.shape(self.v))[idx])

    def __len__(self) -> int:
        return len(self.v)

    def sum(self) -> Jet2:
        shape = np.shape(self.v)
        return Jet2(float(np.sum(self.v)), float(np.sum(np.broadcast_to(self.d1, shape))),
                    float(np.sum(np.broadcast_to(self.d2, shape))))

    def is_constant(self) -> bool:
        return bool(np.all(np.asarray(self.d1) == 0) and np.all(np.asarray(self.d2) == 0))

    # arithmetic ---------------------------------------------------------
    def __add__(self, other) -> Jet2:
        o = lift(other)
        return Jet2(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)

    __radd__ = __add__

    def __sub__(self, other) -> Jet2:
        o = lift(other)
        return Jet2(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)

    def __rsub__(self, other) -> Jet2:
        return lift(other) - self

    def __neg__(self) -> Jet2:
        return Jet2(-self.v, -self.d1, -self.d2)

    def __mul__(self, other) -> Jet2:
        if not isinstance(other, Jet2):
            return Jet2(self.v * other, self.d1 * other, self.d2 * other)
        o = other
        return Jet2(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> Jet2:
        if not isinstance(other, Jet2):
            if np.any(np.asarray(other) == 0):
                raise SingularityError("jet division by zero")
            return Jet2(self.v / other, self.d1 / other, self.d2 / other)
        return self * reciprocal(other)

    def __rtruediv__(self, other) -> Jet2:
        return lift(other) * reciprocal(self)

    def __pow__(self, n: int) -> Jet2:
        if not isinstance(n, (int, np.integer)):
            raise TypeError("Jet2 supports integer powers only; use exp/log for real powers")
        if n == 0:
            return lift(np.ones_like(self.v, dtype=float) if np.ndim(self.v) else 1.0)
        if n < 0:
            return reciprocal(self ** (-n))
        v = self.v
        return _chain(self, v**n, n * v ** (n - 1), n * (n - 1) * v ** (n - 2) if n > 1 else 0.0 * v)


def lift(x) -> Jet2:
    """Promote a number or array to a constant jet; jets pass through."""
    return x if isinstance(x, Jet2) else Jet2.constant(x)


def _chain(a: Jet2, f0, f1, f2) -> Jet2:
    # f(a) given f, f', f'' evaluated at a.v
    return Jet2(f0, f1 * a.d1, f1 * a.d2 + f2 * a.d1 * a.d1)


def reciprocal(a: Jet2) -> Jet2:
    if np.any(np.asarray(a.v) == 0):
        raise SingularityError("jet division by a zero value")
    inv = 1.0 / a.v
    return _chain(a, inv, -inv * inv, 2.0 * inv * inv * inv)


def exp(a) -> Jet2:
    a = lift(a)
    e = np.exp(a.v)
    return _chain(a, e, e, e)


def log(a) -> Jet2:
    a = lift(a)
    if np.any(~(np.asarray(a.v) > 0)):
        raise DomainError("log of a non-positive jet value")
    inv = 1.0 / a.v
    return _chain(a, np.log(a.v), inv, -inv * inv)


def sqrt(a) -> Jet2:
    a = lift(a)
    if np.any(np.asarray(a.v) < 0):
        raise DomainError("sqrt of a negative jet value")
    if np.any(np.asarray(a.v) == 0) and not a.is_constant():
        raise SingularityError("sqrt is not differentiable at zero")
    r = np.sqrt(a.v)
    with np.errstate(divide="ignore", invalid="ignore"):
        f1 = np.where(r > 0, 0.5 / np.where(r > 0, r, 1.0), 0.0)
        f2 = np.where(r > 0, -0.25 / np.where(r > 0, r, 1.0) ** 3, 0.0)
    if np.ndim(r) == 0:
        f1, f2 = float(f1), float(f2)
    return _chain(a, r, f1, f2)


def sin(a) -> Jet2:
    a = lift(a)
    s, c = np.sin(a.v), np.cos(a.v)
    return _chain(a, s, c, -s)


def cos(a) -> Jet2:
    a = lift(a)
    s, c = np.sin(a.v), np.cos(a.v)
    return _chain(a, c, -s, -c)


def sinh(a) -> Jet2:
    a = lift(a)
    s, c = np.sinh(a.v), np.cosh(a.v)
    return _chain(a, s, c, s)


def cosh(a) -> Jet2:
    a = lift(a)
    s, c = np.sinh(a.v), np.cosh(a.v)
    return _chain(a, c, s, c)


def atan2(y, x) -> Jet2:
    """Angle of the point ``(x, y)`` with jets for both coordinates.

    Raises :class:`SingularityError` when any component sits at the origin.
    """
    y, x = lift(y), lift(x)
    r2 = x.v * x.v + y.v * y.v
    if np.any(np.asarray(r2) == 0):
        raise SingularityError("atan2 is undefined at the origin")
    return _atan2_unchecked(y, x, r2)


def _atan2_unchecked(y: Jet2, x: Jet2, r2) -> Jet2:
    cross1 = x.v * y.d1 - y.v * x.d1
    dot1 = x.v * x.d1 + y.v * y.d1
    cross2 = x.v * y.d2 - y.v * x.d2
    inv = 1.0 / r2
    return Jet2(np.arctan2(y.v, x.v), cross1 * inv, cross2 * inv - 2.0 * cross1 * dot1 * inv * inv)


def hypot(x, y) -> Jet2:
    """Euclidean norm of ``(x, y)``. Components at the origin get zero derivatives."""
    x, y = lift(x), lift(y)
    r = np.hypot(x.v, y.v)
    safe = np.where(r > 0, r, 1.0)
    dot1 = x.v * x.d1 + y.v * y.d1
    d1 = dot1 / safe
    d2 = (x.d1 * x.d1 + y.d1 * y.d1 + x.v * x.d2 + y.v * y.d2) / safe - dot1 * dot1 / safe**3
    zero = r == 0
    if np.any(zero):
        d1 = np.where(zero, 0.0, d1)
        d2 = np.where(zero, 0.0, d2)
    if np.ndim(r) == 0:
        return Jet2(float(r), float(d1), float(d2))
    return Jet2(r, d1, d2)


def polar(x, y) -> tuple[Jet2, Jet2]:
    """``(hypot(x, y), atan2(y, x))`` for arrays, with angle 0 at the origin.

    Used for mode energies and Bogoliubov angles where an exactly degenerate
    mode (both components zero) is a legal, measure-zero input.
    """
    x, y = lift(x), lift(y)
    r = hypot(x, y)
    r2 = np.asarray(x.v * x.v + y.v * y.v)
    if np.all(r2 > 0):
        return r, _atan2_unchecked(y, x, r2)
    safe = np.where(r2 > 0, r2, 1.0)
    angle = _atan2_unchecked(y, x, safe)
    zero = r2 == 0
    angle = Jet2(np.where(zero, 0.0, angle.v), np.where(zero, 0.0, angle.d1), np.where(zero, 0.0, angle.d2))
    if np.ndim(r2) == 0:
        angle = Jet2(float(angle.v), float(angle.d1), float(angle.d2))
    return r, angle


def trigamma(a) -> Jet2:
    """Jet of the trigamma function composed with ``a``."""
    a = lift(a)
    if np.any(~(np.asarray(a.v) > 0)):
        raise DomainError("trigamma requires a positive argument")
    return _chain(a, polygamma(1, a.v), polygamma(2, a.v), polygamma(3, a.v))


jet_polygamma = trigamma
