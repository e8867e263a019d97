"""Self-verification against the exact-diagonalization oracle.

Used by the ``verify`` command. Each check returns a :class:`CheckResult`;
the suite passes only if every check does.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from scipy import special

from . import oracle
from .model import ChainParams, perturbed_energies
from .polaron import BathParams, decay_factor, decay_factor_quadrature, renormalize
from .qfi import qfi_total, tilde_classical
from .specfun import polygamma
from .thermo import log_partition, sector_log_partitions

__all__ = ["CheckResult", "run_suite", "LEVELS"]

LEVELS = {
    "fast": {"max_n": 6, "points": 10},
    "full": {"max_n": 8, "points": 50},
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: str = ""


def _random_points(rng: np.random.Generator, count: int, max_n: int) -> Iterator[tuple]:
    sizes = [n for n in (2, 4, 6, 8) if n <= max_n]
    for _ in range(count):
        n = int(rng.choice(sizes))
        chain = ChainParams(n, float(rng.choice([0.2, 1.0])), float(rng.choice([0.25, 1.0])),
                            float(rng.uniform(0.0, 2.0)))
        beta = float(rng.uniform(0.2, 5.0))
        regime = str(rng.choice(["weak", "strong"]))
        alpha = str(rng.choice(["h", "beta"]))
        yield chain, beta, regime, alpha


def _check(name: str, tolerance: float, errors: Callable[[], Iterator[tuple[float, str]]]) -> CheckResult:
    worst, where = 0.0, ""
    for err, label in errors():
        if math.isnan(err) or err > worst:
            worst, where = err, label
    return CheckResult(name, bool(worst <= tolerance), worst, tolerance, where)


def run_suite(level: str = "fast", seed: int = 20240, energy_shift: float = 0.0) -> list[CheckResult]:
    """Run every check at ``level``; ``energy_shift`` perturbs the analytic spectrum."""
    cfg = LEVELS[level]
    bath = BathParams(0.2, 1.0)
    rng = np.random.default_rng(seed)
    points = list(_random_points(rng, cfg["points"], cfg["max_n"]))
    results = []

    with perturbed_energies(energy_shift):
        def qfi_errors():
            for chain, beta, regime, alpha in points:
                ed = oracle.qfi_exact(chain, beta, alpha, bath, regime)
                an = qfi_total(chain, beta, alpha, bath, regime).total
                yield abs(an - ed) / max(1.0, ed), f"{chain} beta={beta:.4g} {regime} alpha={alpha}"

        results.append(_check("QFI vs exact diagonalization", 1e-4, qfi_errors))

        def log_z_errors():
            for chain, beta, regime, _ in points:
                b = bath if regime == "strong" else None
                H = oracle.build_hamiltonian(chain, b, regime, beta)
                ed = oracle.thermal_spectral(H, beta).log_z
                values = chain if b is None else _dressed_values(chain, b, beta)
                an = log_partition(values, beta)
                z_plus, z_minus = oracle.parity_projected_partition(H, chain, beta)
                lp, lm = sector_log_partitions(values, beta)
                errs = [abs(an - ed) / abs(ed) if ed else abs(an),
                        abs(math.exp(lp) - z_plus) / z_plus,
                        abs(math.exp(lm) - z_minus) / max(z_minus, 1e-300)]
                yield max(errs), f"{chain} beta={beta:.4g} {regime}"

        results.append(_check("ln Z and parity sectors vs exact diagonalization", 1e-10, log_z_errors))

        def tilde_errors():
            for chain, beta, _, _ in points[: max(3, len(points) // 3)]:
                if chain.n < 4:
                    continue
                ed = oracle.tilde_classical_exact(chain, bath, beta)
                an = tilde_classical(chain, bath, beta)
                yield abs(an - ed) / max(abs(ed), 1e-12), f"{chain} beta={beta:.4g}"

        results.append(_check("thermal average of d2(beta H) vs exact", 1e-6, tilde_errors))

    if level == "full":
        def polygamma_errors():
            for order in (1, 2, 3):
                for x in np.geomspace(0.05, 50.0, 40):
                    ref = float(special.polygamma(order, x))
                    yield abs(polygamma(order, x) - ref) / abs(ref), f"order={order} x={x:.4g}"

        results.append(_check("polygamma vs scipy", 1e-12, polygamma_errors))

        def quadrature_errors():
            for g in np.linspace(0.05, 0.4, 5):
                for wc in np.geomspace(0.1, 10.0, 5):
                    for beta in np.geomspace(0.2, 10.0, 5):
                        b = BathParams(float(g), float(wc))
                        closed = float(decay_factor(b, float(beta)).v)
                        quad = decay_factor_quadrature(b, float(beta))
                        yield abs(closed - quad) / closed, f"g={g:.3g} wc={wc:.3g} beta={beta:.3g}"

        results.append(_check("decay factor closed form vs quadrature", 1e-8, quadrature_errors))
    return results


def _dressed_values(chain: ChainParams, bath: BathParams, beta: float) -> ChainParams:
    return renormalize(chain, bath, beta).values()


def format_table(results: list[CheckResult], elapsed: float) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'status':<6}  {'worst':>10}  {'tol':>8}"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {status:<6}  {r.worst:>10.3e}  {r.tolerance:>8.1e}")
        if not r.passed:
            lines.append(f"    worst case: {r.detail}")
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} checks passed in {elapsed:.1f} s")
    return "\n".join(lines)


def timed_suite(level: str, seed: int, energy_shift: float) -> tuple[list[CheckResult], float]:
    start = time.perf_counter()
    results = run_suite(level, seed, energy_shift)
    return results, time.perf_counter() - start
