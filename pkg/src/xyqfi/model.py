"""Chain parameters, parity-sector momenta, and the quasiparticle spectrum.

The periodic XY chain

    H = -J/2 sum[(1+gamma) sx_n sx_{n+1} + (1-gamma) sy_n sy_{n+1}] - h sum sz_n

maps to free fermions separately in each parity sector. Even fermion parity
(``Pi = +1``) uses antiperiodic momenta ``K_plus``; odd parity uses periodic
momenta ``K_minus``, which include the two unpaired modes ``0`` and ``pi``.
Inside each sector the Hamiltonian is ``sum_k eps_k (n_k - 1/2)``.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from . import autodiff as ad
from .autodiff import Jet2
from .errors import ParameterError

__all__ = [
    "ChainParams",
    "Couplings",
    "ModeTable",
    "SectorSpectrum",
    "momentum_sets",
    "quasiparticle_energy",
    "bogoliubov_angle",
    "spectrum_jets",
    "sector_spectra",
    "perturbed_energies",
]

JetLike = Union[float, Jet2]

# Debug hook: constant added to every quasiparticle energy. Used only by the
# self-verification command to prove that the oracle comparison can fail.
_ENERGY_PERTURBATION: contextvars.ContextVar[float] = contextvars.ContextVar("energy_perturbation", default=0.0)


@contextlib.contextmanager
def perturbed_energies(delta: float):
    """Temporarily shift every quasiparticle energy by ``delta``."""
    token = _ENERGY_PERTURBATION.set(float(delta))
    try:
        yield
    finally:
        _ENERGY_PERTURBATION.reset(token)


class Couplings(NamedTuple):
    """Exchange, anisotropy and field, each a float or a jet."""

    j: JetLike
    gamma: JetLike
    h: JetLike


@dataclass(frozen=True)
class ChainParams:
    """Bare parameters of a periodic chain of ``n`` spins."""

    n: int
    j: float
    gamma: float
    h: float

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise ParameterError(f"N must be an integer, got {self.n!r}")
        if self.n < 2 or self.n % 2:
            raise ParameterError(f"N must be even and at least 2, got {self.n}")
        for name in ("j", "gamma", "h"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if not 0.0 <= self.gamma <= 1.0:
            raise ParameterError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.h < 0:
            raise ParameterError(f"h must be non-negative, got {self.h}")

    def with_(self, **changes) -> ChainParams:
        fields = {"n": self.n, "j": self.j, "gamma": self.gamma, "h": self.h}
        fields.update(changes)
        return ChainParams(**fields)

    def couplings(self) -> Couplings:
        return Couplings(self.j, self.gamma, self.h)


@dataclass(frozen=True)
class ModeTable:
    """Momentum sets of both parity sectors.

    ``K_plus`` is ordered as ``[k_plus_half, -k_plus_half]`` and ``K_minus`` as
    ``[k_minus_half, -k_minus_half, 0, pi]`` so that pair partners sit half a
    block apart.
    """

    k_plus_half: np.ndarray
    k_minus_half: np.ndarray
    K_plus: np.ndarray
    K_minus: np.ndarray


def momentum_sets(n: int) -> ModeTable:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2 or n % 2:
        raise ParameterError(f"N must be even and at least 2, got {n!r}")
    half = n // 2
    kp = np.array([(2 * l + 1) * np.pi / n for l in range(half)])
    km = np.array([2 * l * np.pi / n for l in range(1, half)])
    return ModeTable(
        k_plus_half=kp,
        k_minus_half=km,
        K_plus=np.concatenate([kp, -kp]),
        K_minus=np.concatenate([km, -km, [0.0, np.pi]]),
    )


def _is_unpaired(k) -> np.ndarray:
    r = np.mod(np.asarray(k, dtype=float), 2 * np.pi)
    return (r < 1e-12) | (np.abs(r - np.pi) < 1e-12) | (2 * np.pi - r < 1e-12)


def _diagonal_and_pairing(c: Couplings, k):
    """``(2(h - J cos k), 2 J gamma sin k)`` with sin forced to zero at 0 and pi."""
    cos_k = np.cos(k)
    sin_k = np.where(_is_unpaired(k), 0.0, np.sin(k))
    if np.ndim(k) == 0:
        sin_k = float(sin_k)
    diag = 2.0 * (c.h - c.j * cos_k)
    pairing = 2.0 * (c.j * c.gamma * sin_k)
    return diag, pairing


def quasiparticle_energy(p: ChainParams, k: float) -> float:
    """Mode energy; the unpaired modes 0 and pi keep their sign."""
    diag, pairing = _diagonal_and_pairing(p.couplings(), float(k))
    shift = _ENERGY_PERTURBATION.get()
    if _is_unpaired(k):
        return float(diag) + shift
    return float(np.hypot(diag, pairing)) + shift


def bogoliubov_angle(p: ChainParams, k: float) -> float:
    """Rotation angle of the ``(k, -k)`` pair, pinned by
    ``eps cos(theta) = 2(h - J cos k)`` and ``eps sin(theta) = 2 J gamma sin k``.
    Returns 0 at an exactly degenerate mode."""
    if _is_unpaired(k):
        raise ParameterError("modes 0 and pi are unpaired and carry no Bogoliubov angle")
    diag, pairing = _diagonal_and_pairing(p.couplings(), float(k))
    if diag == 0 and pairing == 0:
        return 0.0
    return float(np.arctan2(pairing, diag))


def _as_couplings(params) -> Couplings:
    if isinstance(params, Couplings):
        return params
    if isinstance(params, ChainParams):
        return params.couplings()
    if hasattr(params, "couplings"):
        return params.couplings()
    raise TypeError(f"cannot read couplings from {type(params).__name__}")


def spectrum_jets(params, k: float) -> tuple[Jet2, Jet2]:
    """Energy and Bogoliubov angle of a paired mode as jets.

    ``params`` is a :class:`ChainParams`, a :class:`Couplings` of jets, or any
    object with a ``couplings()`` method (such as renormalized parameters).
    """
    if _is_unpaired(k):
        raise ParameterError("modes 0 and pi are unpaired and carry no Bogoliubov angle")
    c = _as_couplings(params)
    diag, pairing = _diagonal_and_pairing(c, float(k))
    eps, theta = ad.polar(ad.lift(diag), ad.lift(pairing))
    return eps + _ENERGY_PERTURBATION.get(), theta


@dataclass(frozen=True)
class SectorSpectrum:
    """Quasiparticle data for every mode of one parity sector.

    ``energy`` and ``angle`` are array-valued jets aligned with ``momenta``.
    ``diag`` and ``pairing`` are the two components whose polar form gives
    energy and angle. Unpaired modes have angle 0 and a signed energy.
    """

    parity: int
    momenta: np.ndarray
    energy: Jet2
    angle: Jet2
    diag: Jet2
    pairing: Jet2
    n_pairs: int

    @property
    def paired(self) -> np.ndarray:
        mask = np.zeros(len(self.momenta), dtype=bool)
        mask[: 2 * self.n_pairs] = True
        return mask


def _sector(parity: int, momenta: np.ndarray, n_pairs: int, c: Couplings) -> SectorSpectrum:
    diag, pairing = _diagonal_and_pairing(c, momenta)
    diag = ad.lift(diag) if isinstance(diag, Jet2) else Jet2.constant(np.asarray(diag, dtype=float))
    pairing = ad.lift(pairing) if isinstance(pairing, Jet2) else Jet2.constant(np.asarray(pairing, dtype=float))
    diag = _broadcast(diag, momenta.shape)
    pairing = _broadcast(pairing, momenta.shape)
    eps, theta = ad.polar(diag, pairing)
    unpaired = ~(np.arange(len(momenta)) < 2 * n_pairs)
    if np.any(unpaired):
        eps = Jet2(np.where(unpaired, diag.v, eps.v), np.where(unpaired, diag.d1, eps.d1),
                   np.where(unpaired, diag.d2, eps.d2))
        theta = Jet2(np.where(unpaired, 0.0, theta.v), np.where(unpaired, 0.0, theta.d1),
                     np.where(unpaired, 0.0, theta.d2))
    eps = eps + _ENERGY_PERTURBATION.get()
    return SectorSpectrum(parity, momenta, eps, theta, diag, pairing, n_pairs)


def _broadcast(j: Jet2, shape) -> Jet2:
    return Jet2(np.broadcast_to(np.asarray(j.v, dtype=float), shape).copy(),
                np.broadcast_to(np.asarray(j.d1, dtype=float), shape).copy(),
                np.broadcast_to(np.asarray(j.d2, dtype=float), shape).copy())


def sector_spectra(n: int, params) -> tuple[SectorSpectrum, SectorSpectrum]:
    """Spectra of the even (+) and odd (-) parity sectors."""
    c = _as_couplings(params)
    table = momentum_sets(n)
    plus = _sector(+1, table.K_plus, n // 2, c)
    minus = _sector(-1, table.K_minus, n // 2 - 1, c)
    return plus, minus
