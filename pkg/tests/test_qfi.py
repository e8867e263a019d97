"""Analytic QFI, its breakdown, and the finite-size thermodynamics built on it."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xyqfi import oracle
from xyqfi.errors import DegenerateEnergyError, ParameterError, UndefinedRatioError
from xyqfi.model import ChainParams
from xyqfi.polaron import BathParams, decay_factor, renormalize
from xyqfi.qfi import (
    kl_divergence_check,
    microscopic_subdivision,
    phase_boundary_h,
    phenomenological_qfi,
    qfi_total,
    quantum_contribution,
    ratio_ppa,
    regress_free_energy,
    subdivision_regression,
    tilde_classical,
    tilde_classical_terms,
)
from xyqfi.thermo import free_entropy_jet

BATH = BathParams(0.2, 1.0)

# (n, j, gamma, h, beta, regime, alpha, QFI) from the dense exact-diagonalization
# oracle (five-point stencil on the density matrix), frozen.
FROZEN_QFI = [
    (4, 1.0, 0.25, 0.7, 2.0, "weak", "h", 4.968934932518354),
    (4, 1.0, 0.25, 0.7, 2.0, "weak", "beta", 0.1790935660045501),
    (4, 1.0, 0.25, 0.7, 2.0, "strong", "h", 1.0942313031454087),
    (4, 1.0, 0.25, 0.7, 2.0, "strong", "beta", 0.21515917841949353),
    (6, 0.2, 1.0, 1.3, 0.8, "weak", "h", 1.5153630899544237),
    (6, 0.2, 1.0, 1.3, 0.8, "weak", "beta", 3.949923156611855),
    (6, 0.2, 1.0, 1.3, 0.8, "strong", "h", 0.3702864013145994),
    (6, 0.2, 1.0, 1.3, 0.8, "strong", "beta", 3.734977954351445),
    (8, 1.0, 0.25, 1.0, 5.0, "weak", "h", 33.202424773475016),
    (8, 1.0, 0.25, 1.0, 5.0, "weak", "beta", 0.02499573799321246),
    (8, 1.0, 0.25, 1.0, 5.0, "strong", "h", 6.917246248203595),
    (8, 1.0, 0.25, 1.0, 5.0, "strong", "beta", 0.015557510968997545),
]
# Tr[rho d2(beta H)/d beta2] and -beta Tr[rho dH/d beta] for the dressed chain
# N = 8, J = 1, gamma = 0.25, h = 1 at beta = 2, from the dense oracle, frozen.
FROZEN_TILDE = 0.029129821071932894
FROZEN_MICROSCOPIC = 0.6168623096588763


class TestQfiAgainstFrozenOracle:
    @pytest.mark.parametrize("n, j, gamma, h, beta, regime, alpha, expected", FROZEN_QFI)
    def test_total(self, n, j, gamma, h, beta, regime, alpha, expected):
        got = qfi_total(ChainParams(n, j, gamma, h), beta, alpha, BATH, regime).total
        assert abs(got - expected) / max(1.0, expected) <= 1e-8


class TestBreakdown:
    @given(st.floats(0.0, 2.0), st.floats(0.2, 5.0), st.sampled_from(["h", "beta"]),
           st.sampled_from(["weak", "strong"]))
    @settings(max_examples=40, deadline=None)
    def test_signs_and_sum(self, h, beta, alpha, regime):
        res = qfi_total(ChainParams(6, 1.0, 0.25, h), beta, alpha, BATH, regime)
        assert res.quantum >= 0.0
        assert res.curvature <= 1e-14
        assert res.total == pytest.approx(res.psi_dd + res.tilde_c + res.curvature + res.quantum, abs=1e-12)
        assert res.classical == pytest.approx(res.total - res.quantum, abs=1e-12)
        assert res.total >= -1e-10

    def test_weak_coupling_has_no_spectral_temperature_term(self):
        res = qfi_total(ChainParams(6, 1.0, 0.25, 0.9), 2.0, "beta", BATH, "weak")
        assert res.tilde_c == 0.0
        assert tilde_classical(ChainParams(6, 1.0, 0.25, 0.9), BATH, 2.0, regime="weak") == 0.0

    def test_field_estimation_has_no_spectral_temperature_term(self):
        assert qfi_total(ChainParams(6, 1.0, 0.25, 0.9), 2.0, "h", BATH, "strong").tilde_c == 0.0

    def test_weak_beta_equals_energy_variance(self):
        # at weak coupling the eigenvectors do not depend on beta
        chain = ChainParams(6, 1.0, 0.25, 0.9)
        res = qfi_total(chain, 2.0, "beta")
        assert res.quantum == 0.0 and res.curvature == 0.0
        assert res.total == pytest.approx(float(free_entropy_jet(chain, 2.0, "beta").d2), rel=1e-13)

    @pytest.mark.parametrize("alpha", ["h", "beta"])
    def test_no_bath_coupling_reduces_to_weak(self, alpha):
        chain = ChainParams(8, 1.0, 0.25, 1.1)
        weak = qfi_total(chain, 2.0, alpha, BATH, "weak").total
        strong = qfi_total(chain, 2.0, alpha, BathParams(0.0), "strong").total
        assert abs(strong - weak) <= 1e-12 * max(1.0, abs(weak))

    @pytest.mark.parametrize("alpha", ["h", "beta"])
    @pytest.mark.parametrize("regime", ["weak", "strong"])
    def test_prefactor_gauge_leaves_total_unchanged(self, alpha, regime):
        chain = ChainParams(8, 1.0, 0.25, 0.8)
        off = qfi_total(chain, 3.0, alpha, BATH, regime)
        on = qfi_total(chain, 3.0, alpha, BATH, regime, include_prefactor=True)
        assert on.total == pytest.approx(off.total, rel=1e-9)
        if regime == "strong" and alpha == "beta":
            assert on.psi_dd != pytest.approx(off.psi_dd, rel=1e-6)

    def test_bad_alpha(self):
        with pytest.raises(ParameterError):
            qfi_total(ChainParams(4, 1.0, 0.5, 1.0), 1.0, "gamma")


class TestQuantumContribution:
    def test_matches_breakdown(self):
        chain = ChainParams(8, 1.0, 0.25, 0.9)
        res = qfi_total(chain, 3.0, "h")
        assert quantum_contribution(chain, 3.0, "h") == pytest.approx(res.quantum, rel=1e-13)

    def test_full_set_convention_disagrees_with_dense(self):
        chain = ChainParams(4, 1.0, 0.25, 0.7)
        exact = 4.968934932518354  # frozen dense value from FROZEN_QFI
        classical = qfi_total(chain, 2.0, "h").classical
        pairs = quantum_contribution(chain, 2.0, "h")
        full = quantum_contribution(chain, 2.0, "h", convention="full-set")
        assert classical + pairs == pytest.approx(exact, rel=1e-8)
        assert abs(classical + full - exact) > 1e-3 * exact

    def test_unknown_convention(self):
        with pytest.raises(ParameterError):
            quantum_contribution(ChainParams(4, 1.0, 0.5, 1.0), 1.0, "h", convention="half")


class TestSpectralTemperatureTerms:
    def test_frozen_mode_sum(self):
        assert tilde_classical(ChainParams(8, 1.0, 0.25, 1.0), BATH, 2.0) == pytest.approx(FROZEN_TILDE, rel=1e-6)

    def test_frozen_microscopic_subdivision(self):
        got = microscopic_subdivision(ChainParams(8, 1.0, 0.25, 1.0), BATH, 2.0)
        assert got == pytest.approx(FROZEN_MICROSCOPIC, rel=1e-8)

    @pytest.mark.parametrize("n", [4, 6])
    @pytest.mark.parametrize("h, beta", [(0.3, 0.7), (1.4, 3.0)])
    def test_against_dense(self, n, h, beta):
        chain = ChainParams(n, 1.0, 0.25, h)
        assert tilde_classical(chain, BATH, beta) == pytest.approx(
            oracle.tilde_classical_exact(chain, BATH, beta), rel=1e-6)
        assert microscopic_subdivision(chain, BATH, beta) == pytest.approx(
            oracle.microscopic_subdivision_exact(chain, BATH, beta), rel=1e-8)

    def test_six_terms_sum_to_total(self):
        t = tilde_classical_terms(ChainParams(6, 1.0, 0.25, 0.8), BATH, 1.5)
        assert t.total == pytest.approx(t.f1 + t.f2 + t.f3 - t.f4 + t.f5 + t.f6 + t.constant)

    def test_equals_breakdown_term(self):
        chain = ChainParams(6, 1.0, 0.25, 0.8)
        assert tilde_classical(chain, BATH, 1.5) == pytest.approx(
            qfi_total(chain, 1.5, "beta", BATH, "strong").tilde_c, rel=1e-10)

    def test_prefactor_constant(self):
        chain = ChainParams(6, 1.0, 0.25, 0.8)
        shift = tilde_classical(chain, BATH, 1.5, include_prefactor=True) - tilde_classical(chain, BATH, 1.5)
        r = renormalize(chain, BATH, 1.5)
        assert shift == pytest.approx(-chain.n * r.h_beta2, rel=1e-10)


class TestPositiveParityRatio:
    def test_converges_with_size(self):
        errs = [abs(ratio_ppa(ChainParams(n, 1.0, 0.25, 2.0), 5.0, "h") - 1) for n in (4, 8, 16)]
        assert errs[0] > errs[1] > errs[2]

    def test_undefined_when_qfi_vanishes(self):
        # behind a large gap the energy variance underflows to zero
        with pytest.raises(UndefinedRatioError):
            ratio_ppa(ChainParams(4, 1.0, 0.25, 40.0), 50.0, "beta")


class TestSubdivision:
    def test_regression_recovers_line(self):
        ns = [4, 6, 8, 10]
        f_bulk, e_sub, residual = regress_free_energy(ns, [-1.25 * n + 0.4 for n in ns])
        assert f_bulk == pytest.approx(-1.25)
        assert e_sub == pytest.approx(0.4)
        assert residual == pytest.approx(0.0, abs=1e-12)

    def test_additive_free_energy_gives_no_subdivision(self):
        ns = [4, 6, 8, 10, 12]
        _, e_sub, _ = regress_free_energy(ns, [-0.731 * n for n in ns])
        assert abs(e_sub) <= 1e-12

    def test_regression_needs_two_sizes(self):
        with pytest.raises(ParameterError):
            regress_free_energy([4], [1.0])

    @pytest.mark.parametrize("source", ["bare", "effective"])
    def test_result_fields(self, source):
        res = subdivision_regression(ChainParams(8, 1.0, 0.25, 1.0), 1.0, source=source, bath=BATH)
        assert res.source == source
        assert res.a_ratio == pytest.approx(res.e_sub / (res.f_bulk * 0 + res.e_sub / res.a_ratio))
        assert math.isfinite(res.residual)

    def test_unknown_source(self):
        with pytest.raises(ParameterError):
            subdivision_regression(ChainParams(8, 1.0, 0.25, 1.0), 1.0, source="other")


class TestPhenomenologicalQfi:
    @pytest.mark.parametrize("alpha", ["h", "beta"])
    def test_zero_subdivision_reduces_to_free_entropy_curvature(self, alpha):
        chain = ChainParams(8, 1.0, 0.25, 0.9)
        got = phenomenological_qfi(chain, 2.0, alpha, subdivision=lambda h, b: 0.0)
        assert got == pytest.approx(float(free_entropy_jet(chain, 2.0, alpha).d2), abs=1e-12)

    def test_regressed_value_is_finite(self):
        assert math.isfinite(phenomenological_qfi(ChainParams(8, 1.0, 0.25, 0.9), 2.0, "beta"))

    def test_vanishing_energy_is_reported(self):
        # U = -beta Tr(H^2) / 2^N + O(beta^2) vanishes at infinite temperature
        with pytest.raises(DegenerateEnergyError):
            phenomenological_qfi(ChainParams(4, 1.0, 0.25, 0.5), 1e-14, "h", subdivision=lambda h, b: 1.0)


class TestRelativeEntropy:
    @pytest.mark.parametrize("n", [4, 6, 8])
    @pytest.mark.parametrize("a", [-0.1, 0.02, 0.3])
    def test_closed_form_matches_direct_sum(self, n, a):
        chain = ChainParams(n, 1.0, 0.25, 0.8)
        assert abs(kl_divergence_check(chain, 1.7, a) - oracle.kl_divergence_exact(chain, 1.7, a)) <= 1e-8

    def test_zero_rescaling(self):
        assert kl_divergence_check(ChainParams(6, 1.0, 0.25, 0.8), 1.7, 0.0) == pytest.approx(0.0, abs=1e-13)


class TestPhaseBoundary:
    def test_bare_boundary_is_exchange(self):
        assert phase_boundary_h(ChainParams(2, 1.3, 0.25, 0.0), None, 2.0) == 1.3
        assert phase_boundary_h(ChainParams(2, 1.3, 0.25, 0.0), BathParams(0.0), 2.0) == 1.3

    @pytest.mark.parametrize("beta", [1.0, 5.0])
    def test_closed_form(self, beta):
        chain = ChainParams(2, 1.0, 0.25, 0.0)
        c = float(decay_factor(BATH, beta).v)
        expected = 0.5 * (1.25 + 0.75 * c * c) / c
        assert phase_boundary_h(chain, BATH, beta) == pytest.approx(expected, rel=1e-14)

    def test_increases_with_coupling(self):
        chain = ChainParams(2, 1.0, 0.25, 0.0)
        hs = [phase_boundary_h(chain, BathParams(g), 5.0) for g in (0.0, 0.1, 0.2, 0.3)]
        assert np.all(np.diff(hs) > 0)

    def test_rejects_non_positive_beta(self):
        with pytest.raises(ParameterError):
            phase_boundary_h(ChainParams(2, 1.0, 0.25, 0.0), BATH, 0.0)
