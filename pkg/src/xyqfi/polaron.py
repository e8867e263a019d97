"""Bath-induced renormalization of the chain at strong coupling.

Each spin couples to its own super-Ohmic bath with spectral density
``K(w) = g w**3 / wc**2 * exp(-w / wc)``. After the full polaron transform the
transverse field and the ``sy sy`` exchange are dressed by the thermal decay
factor

    C(beta) = exp(2 g - 4 g / (beta wc)**2 * trigamma(1 / (beta wc)))

which equals ``exp(-2 int_0^inf K(w)/w**2 coth(beta w / 2) dw)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import autodiff as ad
from .autodiff import Jet2
from .errors import DomainError, NumericError, ParameterError
from .model import ChainParams, Couplings

__all__ = [
    "BathParams",
    "RenormalizedParams",
    "decay_factor",
    "decay_factor_quadrature",
    "renormalize",
    "renormalized_couplings",
]


@dataclass(frozen=True)
class BathParams:
    """Site-bath coupling ``g`` and cutoff frequency ``omega_c``."""

    g: float
    omega_c: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.g) or self.g < 0:
            raise ParameterError(f"g must be finite and non-negative, got {self.g}")
        if not math.isfinite(self.omega_c) or self.omega_c <= 0:
            raise ParameterError(f"omega_c must be positive, got {self.omega_c}")

    def spectral_density(self, omega):
        return self.g * omega**3 / self.omega_c**2 * np.exp(-omega / self.omega_c)


def decay_factor(bath: BathParams, beta) -> Jet2:
    """Closed-form decay factor with exact derivatives in whatever ``beta`` carries."""
    beta = ad.lift(beta)
    if np.any(~(np.asarray(beta.v) > 0)):
        raise DomainError("beta must be positive")
    if bath.g == 0:
        return Jet2.constant(np.ones_like(beta.v) if np.ndim(beta.v) else 1.0)
    z = 1.0 / (beta * bath.omega_c)
    exponent = 2.0 * bath.g - 4.0 * bath.g * (z * z) * ad.trigamma(z)
    return ad.exp(exponent)


_SMALL_OMEGA = 1e-8
_TAIL_CUTOFF = 50.0


def _quadrature_exponent(bath: BathParams, beta: float) -> float:
    g, wc = bath.g, bath.omega_c

    def integrand(w: float) -> float:
        # g w e^{-w/wc} / wc^2 * coth(beta w / 2); x coth(x) -> 1 + x^2/3 near 0
        half = 0.5 * beta * w
        if half < 1e-4:
            w_coth = (2.0 / beta) * (1.0 + half * half / 3.0)
        else:
            w_coth = w / math.tanh(half)
        return g / wc**2 * math.exp(-w / wc) * w_coth

    w_star = _SMALL_OMEGA * wc
    # below w_star the integrand equals 2g/(beta wc^2) to relative 1e-8
    head = 2.0 * g / (beta * wc**2) * w_star
    upper = _TAIL_CUTOFF * wc
    breaks = sorted({min(upper, max(w_star, x)) for x in (wc, 10 * wc, 2.0 / beta, 20.0 / beta)})
    body = 0.0
    lo = w_star
    for hi in breaks + [upper]:
        if hi <= lo:
            continue
        val, err, info = integrate.quad(integrand, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=500, full_output=1)[:3]
        if err > 1e-11 * max(1.0, abs(val)):
            raise NumericError(
                f"decay-factor quadrature did not converge on [{lo}, {hi}]: estimate {val}, error {err}"
            )
        body += val
        lo = hi
    # neglected tail beyond 50 wc is below g (51 wc) e^{-50} (1 + 2/(beta wc)) / wc
    return -2.0 * (head + body)


def decay_factor_quadrature(bath: BathParams, beta: float) -> float:
    """Decay factor by direct numerical integration; an oracle for :func:`decay_factor`."""
    if not beta > 0:
        raise DomainError("beta must be positive")
    if bath.g == 0:
        return 1.0
    return math.exp(_quadrature_exponent(bath, float(beta)))


def renormalized_couplings(chain: ChainParams, c_avg, h=None) -> Couplings:
    """Dressed ``(J, gamma, h)`` for a given decay factor (float or jet).

    ``h`` defaults to the chain field; pass a jet to differentiate in the field.
    """
    h = chain.h if h is None else h
    if ad.lift(c_avg).is_constant() and np.all(ad.lift(c_avg).v == 1.0):
        # no dressing: return the bare couplings bit for bit
        return Couplings(chain.j, chain.gamma, h)
    c2 = c_avg * c_avg
    strong = (1.0 + chain.gamma)
    weak = (1.0 - chain.gamma) * c2
    j_flat = 0.5 * chain.j * (strong + weak)
    gamma_flat = (strong - weak) / (strong + weak)
    return Couplings(j_flat, gamma_flat, c_avg * h)


@dataclass(frozen=True)
class RenormalizedParams:
    """Renormalized chain parameters as jets in ``beta``.

    The four coefficient fields are the temperature derivatives that enter the
    derivative operators of the effective Hamiltonian:
    ``h1 = h dC/dbeta``, ``j1 = J dC^2/dbeta``,
    ``h_beta2 = h d^2(beta C)/dbeta^2`` and ``j_beta2 = J d^2(beta C^2)/dbeta^2``.
    """

    n: int
    h_flat: Jet2
    gamma_flat: Jet2
    j_flat: Jet2
    c_avg: Jet2
    h1: float
    j1: float
    h_beta2: float
    j_beta2: float

    def couplings(self) -> Couplings:
        return Couplings(self.j_flat, self.gamma_flat, self.h_flat)

    def values(self) -> ChainParams:
        return ChainParams(self.n, float(self.j_flat.v), float(min(1.0, max(0.0, self.gamma_flat.v))),
                           float(self.h_flat.v))


def renormalize(chain: ChainParams, bath: BathParams, beta) -> RenormalizedParams:
    """Dressed parameters and derivative coefficients at inverse temperature ``beta``.

    A float ``beta`` is promoted to the active variable so the jets carry
    temperature derivatives.
    """
    beta_jet = beta if isinstance(beta, Jet2) else Jet2.variable(beta)
    c = decay_factor(bath, beta_jet)
    coup = renormalized_couplings(chain, c)
    c2 = c * c
    beta_c = beta_jet * c
    beta_c2 = beta_jet * c2
    return RenormalizedParams(
        n=chain.n,
        h_flat=ad.lift(coup.h),
        gamma_flat=ad.lift(coup.gamma),
        j_flat=ad.lift(coup.j),
        c_avg=c,
        h1=float(c.d1 * chain.h),
        j1=float(c2.d1 * chain.j),
        h_beta2=float(beta_c.d2 * chain.h),
        j_beta2=float(beta_c2.d2 * chain.j),
    )
