"""Brute-force exact diagonalization over the full qubit Hilbert space.

Everything here is built from dense Pauli Kronecker products and dense
eigendecompositions. The decay factor is evaluated with
``scipy.special.polygamma`` and its temperature derivatives by finite
differences, so no code path is shared with the analytic modules beyond the
parameter records. Site 0 is the most significant qubit; ``sz|0> = +|0>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Callable, Optional

import numpy as np
from scipy import special

from .errors import NumericError, ParameterError, ResourceError
from .model import ChainParams
from .polaron import BathParams

__all__ = [
    "MAX_SITES",
    "DenseHermitian",
    "SpectralState",
    "MeanForceThermo",
    "oracle_decay_factor",
    "xy_hamiltonian",
    "build_hamiltonian",
    "parity_operator",
    "thermal_spectral",
    "qfi_spectral",
    "qfi_exact",
    "parity_projected_partition",
    "expectation",
    "tilde_classical_exact",
    "microscopic_subdivision_exact",
    "mfg_thermo",
    "kl_divergence_exact",
]

MAX_SITES = 14

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


@dataclass(frozen=True)
class DenseHermitian:
    """A dense Hermitian matrix on ``2**n`` states."""

    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ParameterError("matrix must be square")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(m), initial=0.0)):
            raise NumericError("matrix is not Hermitian")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SpectralState:
    """Eigen-decomposed Gibbs state; probabilities in descending order."""

    probs: np.ndarray
    vecs: np.ndarray
    energies: np.ndarray
    log_z: float

    def density_matrix(self) -> np.ndarray:
        return (self.vecs * self.probs) @ self.vecs.conj().T


def _check_size(n: int):
    if n > MAX_SITES:
        raise ResourceError(f"dense diagonalization is limited to N <= {MAX_SITES}, got {n}")


def oracle_decay_factor(bath: BathParams, beta: float) -> float:
    if bath.g == 0:
        return 1.0
    z = 1.0 / (beta * bath.omega_c)
    return math.exp(2 * bath.g - 4 * bath.g * z * z * float(special.polygamma(1, z)))


@lru_cache(maxsize=16)
def _bond_operators(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sums over bonds of sx sx and sy sy, and sum of sz, for a periodic ring."""
    _check_size(n)

    def site_op(op, i):
        return reduce(np.kron, [op if j == i else np.eye(2) for j in range(n)])

    sx = [site_op(_SX, i) for i in range(n)]
    sy = [site_op(_SY, i) for i in range(n)]
    sz = [site_op(_SZ, i) for i in range(n)]
    xx = sum(sx[i] @ sx[(i + 1) % n] for i in range(n))
    yy = sum(sy[i] @ sy[(i + 1) % n] for i in range(n))
    zz = sum(sz)
    # sy sy is real for a product of two sites
    return np.real(xx), np.real(yy), np.real(zz)


def xy_hamiltonian(n: int, j: float, gamma: float, h: float) -> np.ndarray:
    """Dense ``-J/2 sum[(1+g) xx + (1-g) yy] - h sum z`` on a ring."""
    xx, yy, zz = _bond_operators(n)
    return -0.5 * j * ((1 + gamma) * xx + (1 - gamma) * yy) - h * zz


def _dressed(chain: ChainParams, c_avg: float, h: float) -> tuple[float, float, float]:
    # (x-coupling, y-coupling, field) with y-coupling and field dressed
    return 0.5 * chain.j * (1 + chain.gamma), 0.5 * chain.j * (1 - chain.gamma) * c_avg**2, c_avg * h


def _coupling_matrix(n: int, a: float, b: float, c: float) -> np.ndarray:
    xx, yy, zz = _bond_operators(n)
    return -a * xx - b * yy - c * zz


def build_hamiltonian(chain: ChainParams, bath: Optional[BathParams] = None, regime: str = "weak",
                      beta: Optional[float] = None, h: Optional[float] = None) -> DenseHermitian:
    """Bare chain at weak coupling; dressed effective chain at strong coupling.

    ``h`` overrides the chain field (allowed to be any real, so finite-difference
    stencils may cross zero).
    """
    _check_size(chain.n)
    field = chain.h if h is None else h
    if regime in ("weak", "WC", "wc"):
        return DenseHermitian(xy_hamiltonian(chain.n, chain.j, chain.gamma, field))
    if regime not in ("strong", "SC", "sc"):
        raise ParameterError(f"unknown regime {regime!r}")
    if beta is None or bath is None:
        raise ParameterError("the strong-coupling Hamiltonian needs beta and bath parameters")
    return DenseHermitian(_coupling_matrix(chain.n, *_dressed(chain, oracle_decay_factor(bath, beta), field)))


def parity_operator(n: int) -> np.ndarray:
    """Diagonal of ``prod sz``."""
    _check_size(n)
    bits = np.array([bin(i).count("1") for i in range(2**n)])
    return np.where(bits % 2 == 0, 1.0, -1.0)


def thermal_spectral(H: DenseHermitian, beta: float) -> SpectralState:
    try:
        energies, vecs = np.linalg.eigh(H.matrix)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    logw = -beta * energies
    top = logw.max()
    w = np.exp(logw - top)
    total = w.sum()
    probs = w / total
    order = np.argsort(-probs, kind="stable")
    return SpectralState(probs[order], vecs[:, order], energies[order], float(top + math.log(total)))


def _density(H: np.ndarray, beta: float) -> np.ndarray:
    return thermal_spectral(DenseHermitian(H), beta).density_matrix()


Family = Callable[[float], tuple[DenseHermitian, float]]


def qfi_spectral(family: Family, point: float, step: Optional[float] = None) -> float:
    """Quantum Fisher information of ``rho(alpha) = exp(-beta H)/Z``.

    ``family(alpha)`` returns ``(H, beta)``. The state derivative uses a
    five-point central stencil; the result is
    ``sum 2 |<m|d rho|n>|^2 / (p_m + p_n)`` over pairs with ``p_m + p_n > 1e-12``.
    """
    step = 1e-4 * (abs(point) + 1.0) if step is None else step
    if not step > 0:
        raise ParameterError("step must be positive")
    rhos = [_density(*_unpack(family(point + k * step))) for k in (-2, -1, 1, 2)]
    drho = (rhos[0] - 8 * rhos[1] + 8 * rhos[2] - rhos[3]) / (12 * step)
    asym = np.max(np.abs(drho - drho.conj().T))
    if asym > 1e-8:
        raise NumericError(f"state derivative is not Hermitian (asymmetry {asym:.3e})")
    drho = 0.5 * (drho + drho.conj().T)
    H, beta = family(point)
    state = thermal_spectral(H, beta)
    d = state.vecs.conj().T @ drho @ state.vecs
    denom = state.probs[:, None] + state.probs[None, :]
    keep = denom > 1e-12
    return float(np.sum(2.0 * np.abs(d[keep]) ** 2 / denom[keep]))


def _unpack(pair):
    H, beta = pair
    return H.matrix, beta


def qfi_exact(chain: ChainParams, beta: float, alpha: str, bath: Optional[BathParams] = None,
              regime: str = "weak", step: Optional[float] = None) -> float:
    """Exact QFI for estimating the field (``alpha='h'``) or ``beta``."""
    if alpha == "h":
        def family(x):
            return build_hamiltonian(chain, bath, regime, beta, h=x), beta
        return qfi_spectral(family, chain.h, step)
    if alpha == "beta":
        def family(x):
            return build_hamiltonian(chain, bath, regime, x), x
        return qfi_spectral(family, beta, step)
    raise ParameterError(f"alpha must be 'h' or 'beta', got {alpha!r}")


def parity_projected_partition(H: DenseHermitian, chain: ChainParams, beta: float) -> tuple[float, float]:
    """``(Tr P+ e^{-beta H}, Tr P- e^{-beta H})`` with ``P+- = (1 +- prod sz)/2``."""
    parity = parity_operator(chain.n)
    if np.max(np.abs(parity[:, None] * H.matrix - H.matrix * parity[None, :])) > 1e-12:
        raise NumericError("Hamiltonian does not conserve parity")
    # diagonalize each parity block on its own so a small sector is not
    # swamped by rounding from the large one
    out = []
    for sign in (1.0, -1.0):
        idx = np.flatnonzero(parity == sign)
        energies = np.linalg.eigvalsh(H.matrix[np.ix_(idx, idx)])
        logw = -beta * energies
        top = logw.max()
        out.append(float(math.exp(top) * np.sum(np.exp(logw - top))))
    return out[0], out[1]


def expectation(state: SpectralState, operator: np.ndarray) -> float:
    return float(np.real(np.trace(state.density_matrix() @ operator)))


def _scalar_derivatives(f: Callable[[float], float], x: float, step: float = 1e-3) -> tuple[float, float]:
    """First and second derivative by five-point stencils with one Richardson step."""

    def stencil(hs):
        fm2, fm1, f0, fp1, fp2 = (f(x + k * hs) for k in (-2, -1, 0, 1, 2))
        d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * hs)
        d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * hs * hs)
        return d1, d2

    a1, a2 = stencil(step)
    b1, b2 = stencil(step / 2)
    return (16 * b1 - a1) / 15, (16 * b2 - a2) / 15


def _coefficient_derivatives(chain: ChainParams, bath: BathParams, beta: float):
    """d/dbeta and d^2/dbeta^2 of (beta a, beta b, beta c) and d/dbeta of (a, b, c)."""
    funcs = [lambda b, i=i: _dressed(chain, oracle_decay_factor(bath, b), chain.h)[i] for i in range(3)]
    # step proportional to beta keeps truncation and round-off both near 1e-9
    step = 5e-3 * beta
    first = [_scalar_derivatives(f, beta, step)[0] for f in funcs]
    second = [_scalar_derivatives(lambda b, f=f: b * f(b), beta, step)[1] for f in funcs]
    return first, second


def tilde_classical_exact(chain: ChainParams, bath: BathParams, beta: float) -> float:
    """``Tr[rho d^2(beta H)/d beta^2]`` for the dressed chain."""
    _, second = _coefficient_derivatives(chain, bath, beta)
    op = _coupling_matrix(chain.n, *second)
    state = thermal_spectral(build_hamiltonian(chain, bath, "strong", beta), beta)
    return expectation(state, op)


def microscopic_subdivision_exact(chain: ChainParams, bath: BathParams, beta: float) -> float:
    """``-beta Tr[rho dH/dbeta]`` for the dressed chain."""
    first, _ = _coefficient_derivatives(chain, bath, beta)
    op = _coupling_matrix(chain.n, *first)
    state = thermal_spectral(build_hamiltonian(chain, bath, "strong", beta), beta)
    return -beta * expectation(state, op)


@dataclass(frozen=True)
class MeanForceThermo:
    f_star: float
    u_star: float
    s_star: float


def mfg_thermo(chain: ChainParams, bath: BathParams, beta: float) -> MeanForceThermo:
    """Free energy, energy and entropy of the mean-force state with ``k_B = 1``,
    approximating the mean-force Hamiltonian by the dressed chain."""
    first, _ = _coefficient_derivatives(chain, bath, beta)
    dH = _coupling_matrix(chain.n, *first)
    H = build_hamiltonian(chain, bath, "strong", beta)
    state = thermal_spectral(H, beta)
    p = state.probs[state.probs > 0]
    von_neumann = float(-np.sum(p * np.log(p)))
    mean_h = float(np.dot(state.probs, state.energies))
    mean_dh = expectation(state, dH)
    return MeanForceThermo(
        f_star=-state.log_z / beta,
        u_star=mean_h + beta * mean_dh,
        s_star=von_neumann + beta**2 * mean_dh,
    )


def kl_divergence_exact(chain: ChainParams, beta: float, a_ratio: float) -> float:
    """``sum p_n ln(p_n / p'_n)`` with ``p'`` the Gibbs weights at ``beta (1 + a)``."""
    energies = np.linalg.eigvalsh(xy_hamiltonian(chain.n, chain.j, chain.gamma, chain.h))

    def log_probs(b):
        lw = -b * energies
        top = lw.max()
        return lw - (top + math.log(np.sum(np.exp(lw - top))))

    lp = log_probs(beta)
    lq = log_probs(beta * (1 + a_ratio))
    return float(np.sum(np.exp(lp) * (lp - lq)))
