"""Quantum Fisher information of the thermal chain and related quantities.

For a Gibbs state ``rho = exp(-beta H)/Z`` whose Hamiltonian depends on the
estimated parameter ``alpha`` (the field ``h`` or ``beta`` itself, which at
strong coupling also enters the dressed couplings) the QFI splits as

    F = d2(ln Z) + <d2(beta E_n)> + F_q

The middle term is the mean curvature of the scaled energy levels. Writing
each scaled level as ``beta eps_k = |(beta D_k, beta P_k)|`` splits it further into

* ``tilde_c``: the thermal average of the operator ``d2(beta H)``, which is
  non-zero only at strong coupling for ``alpha = beta``;
* ``curvature``: ``sum_k beta eps_k (d theta_k)^2 <n_k - 1/2>``, the part coming
  from the rotation of each mode's Bogoliubov angle (never positive).

``F_q`` is the coherent (eigenvector) contribution of the ``(k, -k)`` pairs and
is never negative. ``psi_dd + tilde_c + curvature`` is the classical Fisher
information of the level populations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .autodiff import Jet2
from .errors import DegenerateEnergyError, NumericError, ParameterError, UndefinedRatioError
from .model import ChainParams
from .polaron import BathParams, decay_factor, renormalized_couplings
from .specfun import log_2cosh, log_abs_2sinh
from .thermo import Ensemble, activate, build_ensemble, internal_energy, resolve_regime

__all__ = [
    "QfiBreakdown",
    "ModeSumTerms",
    "SubdivisionResult",
    "qfi_total",
    "quantum_contribution",
    "tilde_classical",
    "tilde_classical_terms",
    "microscopic_subdivision",
    "ratio_ppa",
    "regress_free_energy",
    "subdivision_regression",
    "phenomenological_qfi",
    "kl_divergence_check",
    "phase_boundary_h",
    "DEFAULT_N_LIST",
]

DEFAULT_N_LIST = (4, 6, 8, 10, 12)


@dataclass(frozen=True)
class QfiBreakdown:
    """QFI at one point, split into its four additive pieces."""

    psi_dd: float
    tilde_c: float
    curvature: float
    quantum: float
    total: float
    alpha: str
    regime: str
    finite_size: bool
    include_prefactor: bool = False

    @property
    def classical(self) -> float:
        """Classical Fisher information of the level populations."""
        return self.psi_dd + self.tilde_c + self.curvature


def _operator_coefficients(ens: Ensemble, order: int) -> list[np.ndarray]:
    """Mode coefficients of ``d^order (beta H)`` (order 2) or ``dH/dbeta`` (order 1).

    A one-body operator ``sum_k [D'_k (c_k^+ c_k - 1/2) + P'_k (pairing)]`` has
    thermal average ``sum_k (D'_k cos theta_k + P'_k sin theta_k) <n_k - 1/2>``.
    """
    out = []
    for s in ens.sectors:
        spec = s.spectrum
        if order == 2:
            diag, pair = (ens.beta * spec.diag).d2, (ens.beta * spec.pairing).d2
        else:
            diag, pair = spec.diag.d1, spec.pairing.d1
        theta = np.asarray(spec.angle.v)
        out.append(np.asarray(diag) * np.cos(theta) + np.asarray(pair) * np.sin(theta))
    return out


def _breakdown(ens: Ensemble, alpha: str, regime: str, include_prefactor: bool) -> QfiBreakdown:
    psi_dd = float(ens.log_z.d2)
    tilde_c = ens.expectation(_operator_coefficients(ens, 2))
    if include_prefactor:
        shift = float(ens.prefactor.d2)
        psi_dd += shift
        tilde_c -= shift
    curvature = 0.0
    quantum = 0.0
    for s, occ, pw in zip(ens.sectors, ens.occupations, ens.pair_weights):
        spec = s.spectrum
        p = spec.n_pairs
        if p == 0:
            continue
        dtheta = np.asarray(spec.angle.d1)[: 2 * p]
        x = np.asarray(s.x.v)[: 2 * p]
        curvature += float(np.sum(x * dtheta**2 * occ[: 2 * p]))
        q = np.exp(-2.0 * np.abs(x[:p]))
        quantum += float(np.sum(pw * (1.0 - q) ** 2 / (1.0 + q) * dtheta[:p] ** 2))
    total = psi_dd + tilde_c + curvature + quantum
    return QfiBreakdown(psi_dd, tilde_c, curvature, quantum, total, alpha, regime, ens.finite_size,
                        include_prefactor)


def _ensemble(chain: ChainParams, beta: float, alpha: str, bath: Optional[BathParams], regime: str,
              finite_size: bool) -> tuple[Ensemble, str]:
    bath = resolve_regime(regime, bath)
    name = "weak" if bath is None else "strong"
    ens = build_ensemble(chain, activate(chain.h, alpha, "h"), activate(beta, alpha, "beta"), bath, finite_size)
    return ens, name


def qfi_total(chain: ChainParams, beta: float, alpha: str, bath: Optional[BathParams] = None,
              regime: str = "weak", finite_size: bool = True, include_prefactor: bool = False) -> QfiBreakdown:
    """QFI for estimating ``alpha`` in ``{'h', 'beta'}``.

    ``finite_size=False`` uses the positive-parity approximation throughout:
    only the antiperiodic momenta, with no parity constraint on occupations.
    ``include_prefactor`` measures energies from ``-N h`` (the field
    prefactor convention); only ``psi_dd`` and ``tilde_c`` change and their sum
    is unaffected.
    """
    ens, name = _ensemble(chain, beta, alpha, bath, regime, finite_size)
    return _breakdown(ens, alpha, name, include_prefactor)


def quantum_contribution(chain: ChainParams, beta: float, alpha: str, bath: Optional[BathParams] = None,
                         regime: str = "weak", finite_size: bool = True, convention: str = "pairs") -> float:
    """Coherent part of the QFI.

    ``convention='pairs'`` (the default) sums once over each ``(k, -k)`` pair:

        sum_pairs W_k / Z * 2 sinh(x_k)^2 / cosh(x_k) * (d theta_k)^2,   x_k = beta eps_k

    with ``W_k`` the Boltzmann weight of the other modes restricted to the
    sector's parity. ``convention='full-set'`` evaluates the alternative
    normalization ``9/(4Z) sum_{k in K} e^{-x_k}/2 * Z_k * (e^{-2x_k}-1)^2 /
    (e^{-2x_k}+1) * (d theta_k)^2`` with ``Z_k = prod 2cosh + prod 2sinh`` over the
    rest of the sector; it disagrees with exact diagonalization and is kept
    only for comparison.
    """
    ens, _ = _ensemble(chain, beta, alpha, bath, regime, finite_size)
    if convention == "pairs":
        return _breakdown(ens, alpha, "", False).quantum
    if convention != "full-set":
        raise ParameterError(f"unknown convention {convention!r}")
    psi = float(ens.log_z.v)
    total = 0.0
    for s in ens.sectors:
        spec = s.spectrum
        p = spec.n_pairs
        x = np.asarray(s.x.v)
        dtheta = np.asarray(spec.angle.d1)
        lc = log_2cosh(0.5 * x)
        ls, sg = log_abs_2sinh(0.5 * x)
        for i in range(2 * p):
            rest = np.ones(len(x), dtype=bool)
            rest[[i % p, i % p + p]] = False
            cosh_rest = math.exp(float(np.sum(lc[rest])) - psi)
            sinh_rest = 0.0 if np.any(sg[rest] == 0) else float(np.prod(sg[rest])) * math.exp(float(np.sum(ls[rest])) - psi)
            e2 = math.exp(-2.0 * x[i])
            total += 9.0 / 4.0 * math.exp(-x[i]) / 2.0 * (cosh_rest + sinh_rest) * (e2 - 1) ** 2 / (e2 + 1) * dtheta[i] ** 2
    return total


@dataclass(frozen=True)
class ModeSumTerms:
    """Parity-resolved mode sum for the thermal average of a one-body operator.

    ``f1``/``f2`` are the cosh/sinh halves of the occupation sum in the even
    sector, ``f3``/``f4`` those of the odd sector (``f4`` carries its own minus
    sign and enters as ``-f4``), ``f5``/``f6`` the pair constants weighted by the
    sector probabilities, and ``constant`` the field term.
    """

    f1: float
    f2: float
    f3: float
    f4: float
    f5: float
    f6: float
    constant: float

    @property
    def total(self) -> float:
        return self.f1 + self.f2 + self.f3 - self.f4 + self.f5 + self.f6 + self.constant


def _leave_one_out(logs: np.ndarray, signs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Signed log of ``prod_{l != j} f_l`` for each ``j``; zeros handled exactly."""
    zero = signs == 0
    finite_sum = float(np.sum(np.where(zero, 0.0, logs)))
    n_zero = int(np.sum(zero))
    sign_all = int(np.prod(np.where(zero, 1, signs)))
    out_log = np.empty(len(logs))
    out_sign = np.empty(len(logs), dtype=int)
    for j in range(len(logs)):
        remaining_zero = n_zero - (1 if zero[j] else 0)
        if remaining_zero:
            out_log[j], out_sign[j] = -np.inf, 0
        else:
            out_log[j] = finite_sum - (0.0 if zero[j] else logs[j])
            out_sign[j] = sign_all * (1 if zero[j] else int(signs[j]))
    return out_log, out_sign


def _mode_sum_terms(ens: Ensemble, coeff_diag: list[np.ndarray], coeff_pair: list[np.ndarray],
                    field_coefficient: float) -> ModeSumTerms:
    psi = float(ens.log_z.v)
    probs = ens.sector_probabilities()
    halves = []
    constants = []
    for s, cd, cp, prob in zip(ens.sectors, coeff_diag, coeff_pair, probs):
        spec = s.spectrum
        x = np.asarray(s.x.v)
        theta = np.asarray(spec.angle.v)
        a_coef = cd * np.cos(theta) + cp * np.sin(theta)
        paired = spec.paired
        c_coef = 0.5 * (cd * (1 - np.cos(theta)) - cp * np.sin(theta))
        constants.append(float(np.sum(c_coef[paired])) * prob)
        lc = log_2cosh(0.5 * x)
        lc_out, _ = _leave_one_out(lc, np.ones(len(x), dtype=int))
        ls, sg = log_abs_2sinh(0.5 * x)
        ls_out, sg_out = _leave_one_out(ls, np.asarray(sg))
        # e^{-x_j/2} prod_{l != j} 2cosh(x_l/2) / Z and the sinh analogue
        cosh_part = 0.5 * np.sum(a_coef * np.exp(-0.5 * x + lc_out - psi))
        with np.errstate(invalid="ignore"):
            sinh_terms = np.where(sg_out == 0, 0.0, sg_out * np.exp(-0.5 * x + ls_out - psi))
        sinh_part = -0.5 * np.sum(a_coef * sinh_terms)
        halves.append((float(cosh_part), float(sinh_part)))
    (f1, f2), (f3, f4) = halves
    return ModeSumTerms(f1, f2, f3, f4, constants[0], constants[1], -ens.n * field_coefficient)


def _sc_beta_ensemble(chain: ChainParams, bath: BathParams, beta: float) -> Ensemble:
    return build_ensemble(chain, Jet2.constant(chain.h), Jet2.variable(beta), bath, True)


def tilde_classical_terms(chain: ChainParams, bath: BathParams, beta: float) -> ModeSumTerms:
    """Mode-sum terms of ``Tr[rho d^2(beta H)/d beta^2]`` for the dressed chain.

    The diagonal coefficient of mode ``k`` is ``2(h_beta2 - zeta_k)`` with
    ``zeta_k = j_beta2 (1 - gamma) cos(k) / 2``; the pairing coefficient is
    ``-j_beta2 (1 - gamma) sin(k)``.
    """
    ens = _sc_beta_ensemble(chain, bath, beta)
    diag, pair = [], []
    for s in ens.sectors:
        diag.append(np.asarray((ens.beta * s.spectrum.diag).d2, dtype=float))
        pair.append(np.asarray((ens.beta * s.spectrum.pairing).d2, dtype=float))
    h_beta2 = float((ens.beta * ens.field).d2)
    return _mode_sum_terms(ens, diag, pair, h_beta2)


def tilde_classical(chain: ChainParams, bath: Optional[BathParams], beta: float, regime: str = "strong",
                    alpha: str = "beta", include_prefactor: bool = False) -> float:
    """Thermal average of ``d^2(beta H)/d beta^2`` (zero at weak coupling or for ``alpha='h'``).

    With ``include_prefactor`` the energies are measured from ``-N h_flat`` and
    one more ``-N h_beta2`` is added.
    """
    bath = resolve_regime(regime, bath)
    if bath is None or alpha == "h":
        return 0.0
    terms = tilde_classical_terms(chain, bath, beta)
    return terms.total + (terms.constant if include_prefactor else 0.0)


def microscopic_subdivision(chain: ChainParams, bath: BathParams, beta: float) -> float:
    """``-beta <dH/dbeta>`` for the dressed chain."""
    ens = _sc_beta_ensemble(chain, bath, beta)
    diag = [np.asarray(s.spectrum.diag.d1, dtype=float) for s in ens.sectors]
    pair = [np.asarray(s.spectrum.pairing.d1, dtype=float) for s in ens.sectors]
    h1 = float(ens.field.d1)
    return -beta * _mode_sum_terms(ens, diag, pair, h1).total


def ratio_ppa(chain: ChainParams, beta: float, alpha: str, bath: Optional[BathParams] = None,
              regime: str = "weak") -> float:
    """``F_PPA / F`` at one point."""
    full = qfi_total(chain, beta, alpha, bath, regime, True).total
    if abs(full) < 1e-12:
        raise UndefinedRatioError(f"QFI is numerically zero ({full:.3e}); the ratio is undefined")
    return qfi_total(chain, beta, alpha, bath, regime, False).total / full


# --- finite-size thermodynamics --------------------------------------------------


@dataclass(frozen=True)
class SubdivisionResult:
    """Fit ``F(N) = N f_bulk + e_sub`` and the ratio ``a = e_sub / U``."""

    f_bulk: float
    e_sub: float
    a_ratio: float
    source: str
    residual: Optional[float]


def regress_free_energy(n_values: Sequence[float], free_energies: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares slope, intercept and root-mean-square residual of ``F`` against ``N``."""
    n_values = np.asarray(n_values, dtype=float)
    free_energies = np.asarray(free_energies, dtype=float)
    if n_values.size < 2 or np.ptp(n_values) == 0:
        raise ParameterError("regression needs at least two distinct system sizes")
    design = np.column_stack([n_values, np.ones_like(n_values)])
    coef, *_ = np.linalg.lstsq(design, free_energies, rcond=None)
    resid = free_energies - design @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2)))


def _log_z(chain: ChainParams, n: int, h, beta, bath: Optional[BathParams]) -> Jet2:
    return build_ensemble(chain.with_(n=n), h, beta, bath, True).log_z


def _source_bath(source: str, bath: Optional[BathParams]) -> Optional[BathParams]:
    if source == "bare":
        return None
    if source == "effective":
        if bath is None:
            raise ParameterError("source='effective' requires bath parameters")
        return bath
    raise ParameterError(f"source must be 'bare' or 'effective', got {source!r}")


def _subdivision_at(chain: ChainParams, h: float, beta: float, n_list, bath) -> tuple[float, float, float]:
    free = [-float(_log_z(chain, n, h, beta, bath).v) / beta for n in n_list]
    return regress_free_energy(list(n_list), free)


def _energy_at(chain: ChainParams, h: float, beta: float, bath) -> float:
    return -float(_log_z(chain, chain.n, Jet2.constant(h), Jet2.variable(beta), bath).d1)


def subdivision_regression(chain: ChainParams, beta: float, n_list: Sequence[int] = DEFAULT_N_LIST,
                           source: str = "bare", bath: Optional[BathParams] = None) -> SubdivisionResult:
    """Regress ``F = -ln Z / beta`` on ``N`` for the bare or dressed chain.

    ``a_ratio`` divides the intercept by the internal energy of ``chain`` (its
    own ``N``); it is NaN when that energy vanishes.
    """
    use_bath = _source_bath(source, bath)
    slope, intercept, resid = _subdivision_at(chain, chain.h, beta, n_list, use_bath)
    energy = _energy_at(chain, chain.h, beta, use_bath)
    a = intercept / energy if abs(energy) >= 1e-12 else math.nan
    return SubdivisionResult(slope, intercept, a, source, resid)


def _stencil_derivatives(f: Callable[[float], float], x: float, step: float) -> tuple[float, float, float]:
    """Value, first and second derivative by five-point stencils plus one Richardson step."""
    f0 = f(x)

    def pair(hs):
        fm2, fm1, fp1, fp2 = (f(x + k * hs) for k in (-2, -1, 1, 2))
        return ((fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * hs),
                (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * hs * hs))

    a1, a2 = pair(step)
    b1, b2 = pair(step / 2)
    return f0, (16 * b1 - a1) / 15, (16 * b2 - a2) / 15


def phenomenological_qfi(chain: ChainParams, beta: float, alpha: str, source: str = "bare",
                         bath: Optional[BathParams] = None, n_list: Sequence[int] = DEFAULT_N_LIST,
                         step: float = 1e-3,
                         subdivision: Optional[Callable[[float, float], float]] = None,
                         include_prefactor: bool = False) -> float:
    """QFI of the uniformly rescaled Gibbs state ``Z(beta (1 + a), h)`` plus ``d2(beta E_sub)``.

    ``a = E_sub / U`` is recomputed at every stencil point; its derivatives in
    ``alpha`` come from finite differences and are then pushed through the exact
    jets of ``ln Z``. ``subdivision(h, beta)`` replaces the regression when given.
    """
    use_bath = _source_bath(source, bath)
    if alpha not in ("h", "beta"):
        raise ParameterError(f"alpha must be 'h' or 'beta', got {alpha!r}")

    def point(x):
        return (x, beta) if alpha == "h" else (chain.h, x)

    def e_sub(x):
        h, b = point(x)
        if subdivision is not None:
            return subdivision(h, b)
        return _subdivision_at(chain, h, b, n_list, use_bath)[1]

    def a_ratio(x):
        h, b = point(x)
        energy = _energy_at(chain, h, b, use_bath)
        if abs(energy) < 1e-12:
            raise DegenerateEnergyError(f"internal energy vanishes at h={h}, beta={b}")
        return e_sub(x) / energy

    x0 = chain.h if alpha == "h" else beta
    a_jet = Jet2(*_stencil_derivatives(a_ratio, x0, step))
    s_d2 = _stencil_derivatives(lambda x: point(x)[1] * e_sub(x), x0, step)[2]
    h_jet = activate(chain.h, alpha, "h")
    beta_jet = activate(beta, alpha, "beta")
    scaled_beta = beta_jet * (1.0 + a_jet)
    ens = build_ensemble(chain, h_jet, scaled_beta, use_bath, True)
    psi = ens.log_z + ens.prefactor if include_prefactor else ens.log_z
    return float(psi.d2) + float(s_d2)


def kl_divergence_check(chain: ChainParams, beta: float, a_ratio: float) -> float:
    """Relative entropy between ``exp(-beta H)/Z`` and ``exp(-beta (1 + a) H)/Z'``.

    Uses ``ln(Z'/Z) + a beta U``, which equals ``ln(Z'/Z) + beta E_sub`` when
    ``a = E_sub / U``.
    """
    lz = build_ensemble(chain, chain.h, Jet2.variable(beta)).log_z
    lz_scaled = float(build_ensemble(chain, chain.h, beta * (1.0 + a_ratio)).log_z.v)
    energy = -float(lz.d1)
    return lz_scaled - float(lz.v) + a_ratio * beta * energy


def phase_boundary_h(chain: ChainParams, bath: Optional[BathParams], beta: float, tol: float = 1e-10) -> float:
    """Field where the dressed field equals the dressed exchange, ``C h = J_flat``.

    The closed form ``J_flat / C`` is cross-checked by bisection.
    """
    if not beta > 0:
        raise ParameterError("beta must be positive")
    c = 1.0 if bath is None else float(decay_factor(bath, beta).v)
    j_flat = float(renormalized_couplings(chain, c).j)
    if j_flat <= 0:
        raise ParameterError("the phase boundary needs a positive exchange coupling")
    closed = j_flat / c
    lo, hi = 0.0, 2.0 * closed + 1.0
    while hi - lo > tol * max(1.0, closed):
        mid = 0.5 * (lo + hi)
        if c * mid - j_flat > 0:
            hi = mid
        else:
            lo = mid
    if abs(0.5 * (lo + hi) - closed) > 10 * tol * max(1.0, closed):
        raise NumericError("bisection disagrees with the closed-form phase boundary")
    return closed
