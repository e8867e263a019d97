"""Partition functions, free entropy and thermal mode statistics.

Parity-resolved sums are accumulated with a two-state recurrence over modes
rather than as ``(prod cosh +/- prod sinh) / 2``. Every factor is scaled by
``exp(-|beta eps| / 2)`` so that each step adds non-negative numbers; the
difference of the cosh and sinh products, which loses all precision at low
temperature, is never formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from . import autodiff as ad
from .autodiff import Jet2
from .errors import DomainError, ParameterError
from .model import ChainParams, SectorSpectrum, sector_spectra
from .polaron import BathParams, decay_factor, renormalized_couplings
from .specfun import SignedLog, log_2cosh, log_abs_2sinh

__all__ = [
    "PartitionTerms",
    "Ensemble",
    "build_ensemble",
    "activate",
    "partition_terms",
    "log_partition",
    "sector_log_partitions",
    "free_entropy_jet",
    "reduced_sector_product",
    "internal_energy",
    "energy_variance",
    "resolve_regime",
]

_REGIME_ALIASES = {"weak": "weak", "wc": "weak", "strong": "strong", "sc": "strong"}


def resolve_regime(regime: str, bath: Optional[BathParams]) -> Optional[BathParams]:
    """Bath to use for a regime name: ``None`` at weak coupling."""
    key = _REGIME_ALIASES.get(str(regime).lower())
    if key is None:
        raise ParameterError(f"regime must be 'weak' or 'strong', got {regime!r}")
    if key == "weak":
        return None
    if bath is None:
        raise ParameterError("strong coupling requires bath parameters")
    return bath


def activate(value: float, alpha: str, name: str) -> Jet2:
    """Jet for parameter ``name``; it is the active variable when ``alpha == name``."""
    if alpha not in ("h", "beta"):
        raise ParameterError(f"alpha must be 'h' or 'beta', got {alpha!r}")
    return Jet2.variable(value) if alpha == name else Jet2.constant(float(value))


@dataclass(frozen=True)
class _Sector:
    spectrum: SectorSpectrum
    x: Jet2  # beta * eps per mode
    parity: Optional[int]  # 0 even, 1 odd, None unconstrained

    @cached_property
    def scale(self) -> np.ndarray:
        return np.abs(np.asarray(self.x.v, dtype=float))

    @cached_property
    def log_scale(self) -> float:
        return 0.5 * float(np.sum(self.scale))

    @cached_property
    def scale_jet(self) -> Jet2:
        # |x| with its derivatives, so that the ground-state part of ln Z is
        # differentiated analytically rather than through the recurrence
        return self.x * np.sign(np.asarray(self.x.v, dtype=float))

    @cached_property
    def log_scale_jet(self) -> Jet2:
        return 0.5 * self.scale_jet.sum()

    @cached_property
    def weights(self) -> tuple[Jet2, Jet2]:
        # scaled Boltzmann factors of n = 0 and n = 1
        half = 0.5 * self.scale_jet
        return ad.exp(0.5 * self.x - half), ad.exp(-0.5 * self.x - half)

    @cached_property
    def weight_values(self) -> tuple[np.ndarray, np.ndarray]:
        w0, w1 = self.weights
        return np.asarray(w0.v, dtype=float), np.asarray(w1.v, dtype=float)

    @cached_property
    def scaled_sum(self) -> Jet2:
        w0, w1 = self.weights
        even, odd = Jet2.constant(1.0), Jet2.constant(0.0)
        for i in range(len(self.spectrum.momenta)):
            a, b = w0[i], w1[i]
            even, odd = even * a + odd * b, odd * a + even * b
        if self.parity is None:
            return even + odd
        return even if self.parity == 0 else odd

    def excluded_sums(self, excluded: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Scaled (even, odd) sums over the modes left after removing each row of
        the boolean mask ``excluded`` (shape ``groups x modes``)."""
        w0, w1 = self.weight_values
        even = np.ones(excluded.shape[0])
        odd = np.zeros(excluded.shape[0])
        for l in range(excluded.shape[1]):
            a = np.where(excluded[:, l], 1.0, w0[l])
            b = np.where(excluded[:, l], 0.0, w1[l])
            even, odd = even * a + odd * b, odd * a + even * b
        return even, odd

    def _select(self, even, odd, parity):
        if parity is None:
            return even + odd
        return even if parity == 0 else odd


@dataclass(frozen=True)
class Ensemble:
    """Thermal state of the free-fermion chain at one parameter point.

    ``beta`` and the couplings may carry jets in a single active parameter;
    ``log_z`` then carries the derivatives of the free entropy. All
    expectation values are normalized by the full partition function (or the
    positive-parity product when ``finite_size`` is false).
    """

    n: int
    beta: Jet2
    field: Jet2  # effective transverse field (bare or dressed)
    sectors: tuple[_Sector, ...]
    finite_size: bool

    @cached_property
    def log_z(self) -> Jet2:
        """Free entropy ``ln Tr exp(-beta H)`` of the spin Hamiltonian."""
        top = max(self.sectors, key=lambda s: s.log_scale)
        anchor = top.log_scale_jet
        total = None
        for s in self.sectors:
            term = s.scaled_sum if s is top else s.scaled_sum * ad.exp(s.log_scale_jet - anchor)
            total = term if total is None else total + term
        return ad.log(total) + anchor

    @property
    def prefactor(self) -> Jet2:
        """Exponent ``N beta h`` of the field prefactor convention."""
        return self.n * (self.beta * self.field)

    def sector_log_z(self) -> list[float]:
        out = []
        for s in self.sectors:
            val = float(s.scaled_sum.v)
            out.append(s.log_scale + math.log(val) if val > 0 else -math.inf)
        return out

    def sector_probabilities(self) -> list[float]:
        psi = float(self.log_z.v)
        return [math.exp(lz - psi) if lz > -math.inf else 0.0 for lz in self.sector_log_z()]

    @cached_property
    def occupations(self) -> list[np.ndarray]:
        """Per sector, ``Tr[P_sector rho (n_j - 1/2)]`` for every mode ``j``."""
        psi = float(self.log_z.v)
        out = []
        for s in self.sectors:
            m = len(s.spectrum.momenta)
            even, odd = s.excluded_sums(np.eye(m, dtype=bool))
            w0, w1 = s.weight_values
            if s.parity is None:
                rest = even + odd
                val = 0.5 * (w1 - w0) * rest
            else:
                same = even if s.parity == 0 else odd
                flip = odd if s.parity == 0 else even
                val = 0.5 * (w1 * flip - w0 * same)
            out.append(val * math.exp(s.log_scale - psi))
        return out

    @cached_property
    def pair_weights(self) -> list[np.ndarray]:
        """Per sector and pair ``(k, -k)``: weight of the remaining modes in the
        sector's parity, divided by ``Z`` and multiplied by ``exp(|beta eps_k|)``."""
        psi = float(self.log_z.v)
        out = []
        for s in self.sectors:
            p = s.spectrum.n_pairs
            m = len(s.spectrum.momenta)
            mask = np.zeros((p, m), dtype=bool)
            idx = np.arange(p)
            mask[idx, idx] = True
            mask[idx, idx + p] = True
            even, odd = s.excluded_sums(mask)
            out.append(s._select(even, odd, s.parity) * math.exp(s.log_scale - psi))
        return out

    def expectation(self, coefficients: list[np.ndarray]) -> float:
        """``sum_j c_j <n_j - 1/2>`` over all sectors."""
        return float(sum(np.dot(c, o) for c, o in zip(coefficients, self.occupations)))


def _couplings(chain: ChainParams, h: Jet2, beta: Jet2, bath: Optional[BathParams]):
    if bath is None:
        return chain.couplings()._replace(h=h)
    return renormalized_couplings(chain, decay_factor(bath, beta), h)


def build_ensemble(chain: ChainParams, h, beta, bath: Optional[BathParams] = None,
                   finite_size: bool = True) -> Ensemble:
    """Thermal ensemble; ``bath=None`` is weak coupling, otherwise the dressed chain."""
    h, beta = ad.lift(h), ad.lift(beta)
    if not float(beta.v) > 0:
        raise DomainError("beta must be positive")
    coup = _couplings(chain, h, beta, bath)
    plus, minus = sector_spectra(chain.n, coup)
    if finite_size:
        sectors = (_Sector(plus, beta * plus.energy, 0), _Sector(minus, beta * minus.energy, 1))
    else:
        sectors = (_Sector(plus, beta * plus.energy, None),)
    return Ensemble(chain.n, beta, ad.lift(coup.h), sectors, finite_size)


@dataclass(frozen=True)
class PartitionTerms:
    """The four signed-log products over both momentum sets and the field exponent.

    ``p1``/``p2`` are the cosh/sinh products of ``beta eps / 2`` over ``K_plus``,
    ``p3``/``p4`` the same over ``K_minus``.
    """

    p1: SignedLog
    p2: SignedLog
    p3: SignedLog
    p4: SignedLog
    field_prefactor_log: float


def _product(x: np.ndarray, kind: str) -> SignedLog:
    if kind == "cosh":
        return SignedLog(float(np.sum(log_2cosh(0.5 * x))), 1)
    mags, signs = log_abs_2sinh(0.5 * x)
    if np.any(signs == 0):
        return SignedLog.zero()
    return SignedLog(float(np.sum(mags)), int(np.prod(signs)))


def partition_terms(p: ChainParams, beta: float, include_prefactor: bool = False) -> PartitionTerms:
    """Cosh and sinh products of both parity sectors for bare (or dressed) values."""
    ens = build_ensemble(p, p.h, beta)
    plus, minus = ens.sectors
    xp, xm = np.asarray(plus.x.v), np.asarray(minus.x.v)
    return PartitionTerms(
        _product(xp, "cosh"),
        _product(xp, "sinh"),
        _product(xm, "cosh"),
        _product(xm, "sinh"),
        p.n * p.h * beta if include_prefactor else 0.0,
    )


def log_partition(p: ChainParams, beta: float, finite_size: bool = True, include_prefactor: bool = False) -> float:
    """``ln Z`` of the chain, or of the positive-parity approximation."""
    ens = build_ensemble(p, p.h, beta, finite_size=finite_size)
    val = float(ens.log_z.v)
    return val + (p.n * p.h * beta if include_prefactor else 0.0)


def sector_log_partitions(p: ChainParams, beta: float) -> tuple[float, float]:
    """``(ln Z_plus, ln Z_minus)``: parity-projected traces of ``exp(-beta H)``."""
    lz = build_ensemble(p, p.h, beta).sector_log_z()
    return lz[0], lz[1]


def free_entropy_jet(chain: ChainParams, beta: float, alpha: str, bath: Optional[BathParams] = None,
                     regime: str = "weak", finite_size: bool = True,
                     include_prefactor: bool = False) -> Jet2:
    """Free entropy with first and second derivatives in ``alpha``."""
    bath = resolve_regime(regime, bath)
    ens = build_ensemble(chain, activate(chain.h, alpha, "h"), activate(beta, alpha, "beta"), bath, finite_size)
    psi = ens.log_z
    return psi + ens.prefactor if include_prefactor else psi


def reduced_sector_product(p: ChainParams, beta: float, sector: str, k: float) -> SignedLog:
    """Twice the Boltzmann weight of a sector with the pair ``(k, -k)`` removed.

    Equals ``prod 2cosh + s * prod 2sinh`` over the remaining modes, where
    ``s = +1`` in the even sector and ``s = -1`` in the odd one (the pair itself
    holds an even number of quasiparticles, so the rest must carry the sector
    parity).
    """
    if sector not in ("+", "-"):
        raise ParameterError("sector must be '+' or '-'")
    ens = build_ensemble(p, p.h, beta)
    s = ens.sectors[0 if sector == "+" else 1]
    spec = s.spectrum
    pairs = spec.momenta[: spec.n_pairs]
    hit = np.flatnonzero(np.isclose(np.mod(pairs - k, 2 * np.pi), 0.0, atol=1e-12)
                         | np.isclose(np.mod(pairs + k, 2 * np.pi), 0.0, atol=1e-12)
                         | np.isclose(np.mod(pairs - k, 2 * np.pi), 2 * np.pi, atol=1e-12)
                         | np.isclose(np.mod(pairs + k, 2 * np.pi), 2 * np.pi, atol=1e-12))
    if hit.size == 0:
        raise ParameterError(f"k={k} is not a paired mode of sector {sector}")
    i = int(hit[0])
    mask = np.zeros((1, len(spec.momenta)), dtype=bool)
    mask[0, [i, i + spec.n_pairs]] = True
    even, odd = s.excluded_sums(mask)
    val = float(s._select(even, odd, s.parity)[0])
    if val == 0:
        return SignedLog.zero()
    rest = s.log_scale - float(s.scale[i])
    return SignedLog(math.log(2.0 * val) + rest, 1)


def internal_energy(chain: ChainParams, beta: float, bath: Optional[BathParams] = None,
                    regime: str = "weak", include_prefactor: bool = False) -> float:
    """``U = -d(ln Z)/d(beta)`` including any temperature dependence of the spectrum."""
    return -float(free_entropy_jet(chain, beta, "beta", bath, regime, True, include_prefactor).d1)


def energy_variance(chain: ChainParams, beta: float) -> float:
    """Weak-coupling energy variance ``d^2 ln Z / d beta^2``."""
    return float(free_entropy_jet(chain, beta, "beta").d2)
