"""Exception types raised across the package."""

from __future__ import annotations


class XyqfiError(Exception):
    """Base class for every error raised by this package."""


class DomainError(XyqfiError, ValueError):
    """An argument lies outside the domain of a function (e.g. ln of a non-positive value)."""


class SingularityError(XyqfiError, ZeroDivisionError):
    """A derivative or quotient is undefined at the requested point."""


class ParameterError(XyqfiError, ValueError):
    """Invalid physical or numerical parameter (odd N, negative coupling, bad order...)."""


class ResourceError(XyqfiError, MemoryError):
    """A dense computation would exceed the configured size guard."""


class NumericError(XyqfiError, ArithmeticError):
    """A numerical routine failed to converge or produced an inconsistent result."""


class UndefinedRatioError(XyqfiError, ZeroDivisionError):
    """A ratio was requested whose denominator is numerically zero."""


class DegenerateEnergyError(XyqfiError, ZeroDivisionError):
    """The internal energy vanishes, so a ratio normalized by it is undefined."""
