"""Chain parameters, momentum sets and Bogoliubov spectra."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from numdiff import relative_error, richardson
from xyqfi.autodiff import Jet2
from xyqfi.errors import ParameterError
from xyqfi.model import (
    ChainParams,
    Couplings,
    bogoliubov_angle,
    momentum_sets,
    perturbed_energies,
    quasiparticle_energy,
    sector_spectra,
    spectrum_jets,
)


class TestChainParams:
    @pytest.mark.parametrize("n", [0, 1, 3, -2, 2.0, True])
    def test_bad_length(self, n):
        with pytest.raises(ParameterError):
            ChainParams(n, 1.0, 0.5, 1.0)

    @pytest.mark.parametrize("gamma", [-0.1, 1.5, float("nan")])
    def test_bad_anisotropy(self, gamma):
        with pytest.raises(ParameterError):
            ChainParams(4, 1.0, gamma, 1.0)

    def test_negative_field_rejected(self):
        with pytest.raises(ParameterError):
            ChainParams(4, 1.0, 0.5, -0.1)

    def test_with_replaces_fields(self):
        p = ChainParams(4, 1.0, 0.5, 1.0).with_(h=2.0, n=6)
        assert (p.n, p.h) == (6, 2.0)


class TestMomentumSets:
    @pytest.mark.parametrize("n", [2, 4, 6, 8, 12])
    def test_set_sizes_and_pairing(self, n):
        t = momentum_sets(n)
        assert len(t.K_plus) == n and len(t.K_minus) == n
        assert np.allclose(t.K_plus[n // 2:], -t.K_plus[: n // 2])
        assert 0.0 in t.K_minus and math.pi in t.K_minus

    @pytest.mark.parametrize("n", [4, 8])
    def test_antiperiodic_and_periodic_quantisation(self, n):
        t = momentum_sets(n)
        assert np.allclose(np.cos(n * t.K_plus / 2), 0.0, atol=1e-12)
        assert np.allclose(np.sin(n * t.K_minus / 2), 0.0, atol=1e-12)

    def test_rejects_odd(self):
        with pytest.raises(ParameterError):
            momentum_sets(5)


class TestQuasiparticles:
    def test_ising_critical_energy(self):
        p = ChainParams(8, 1.0, 1.0, 1.0)
        k = math.pi / 8
        assert quasiparticle_energy(p, k) == pytest.approx(4.0 * math.sin(k / 2))

    def test_unpaired_modes_keep_sign(self):
        p = ChainParams(4, 1.0, 0.3, 0.4)
        assert quasiparticle_energy(p, 0.0) == pytest.approx(2 * (0.4 - 1.0))
        assert quasiparticle_energy(p, math.pi) == pytest.approx(2 * (0.4 + 1.0))

    @given(st.floats(0.0, 3.0), st.floats(0.01, 1.0), st.floats(0.05, 3.1))
    def test_polar_form_reproduces_components(self, h, gamma, k):
        p = ChainParams(4, 1.0, gamma, h)
        eps, theta = quasiparticle_energy(p, k), bogoliubov_angle(p, k)
        assert eps * math.cos(theta) == pytest.approx(2 * (h - math.cos(k)), abs=1e-12)
        assert eps * math.sin(theta) == pytest.approx(2 * gamma * math.sin(k), abs=1e-12)

    def test_angle_zero_at_degenerate_mode(self):
        p = ChainParams(4, 1.0, 0.0, math.cos(math.pi / 4))
        assert bogoliubov_angle(p, math.pi / 4) == 0.0

    def test_unpaired_mode_has_no_angle(self):
        with pytest.raises(ParameterError):
            bogoliubov_angle(ChainParams(4, 1.0, 0.5, 1.0), 0.0)

    @pytest.mark.parametrize("which", ["h", "gamma", "j"])
    def test_jets_match_finite_differences(self, which):
        base = {"j": 0.9, "gamma": 0.4, "h": 1.2}
        k = 3 * math.pi / 8

        def at(x, idx):
            p = ChainParams(8, **{**base, which: x})
            return (quasiparticle_energy(p, k), bogoliubov_angle(p, k))[idx]

        c = Couplings(**{key: Jet2.variable(v) if key == which else v for key, v in base.items()})
        eps, theta = spectrum_jets(c, k)
        for jet, idx in ((eps, 0), (theta, 1)):
            d1, d2 = richardson(lambda x: at(x, idx), base[which])
            assert relative_error(jet.d1, d1) <= 1e-7
            assert relative_error(jet.d2, d2, floor=1e-8) <= 1e-6


class TestSectorSpectra:
    def test_matches_pointwise_functions(self):
        p = ChainParams(6, 1.0, 0.25, 0.8)
        plus, minus = sector_spectra(6, p)
        for spec in (plus, minus):
            for i, k in enumerate(spec.momenta):
                assert spec.energy.v[i] == pytest.approx(quasiparticle_energy(p, k), abs=1e-14)
                if spec.paired[i] and k > 0:
                    assert spec.angle.v[i] == pytest.approx(bogoliubov_angle(p, k), abs=1e-14)

    def test_unpaired_angles_pinned(self):
        _, minus = sector_spectra(4, ChainParams(4, 1.0, 0.5, 0.2))
        assert np.all(minus.angle.v[~minus.paired] == 0.0)
        assert minus.paired.sum() == 2

    def test_perturbation_shifts_all_energies(self):
        p = ChainParams(4, 1.0, 0.5, 0.7)
        base = sector_spectra(4, p)[0].energy.v
        with perturbed_energies(0.25):
            shifted = sector_spectra(4, p)[0].energy.v
        assert np.allclose(shifted - base, 0.25)
        assert np.allclose(sector_spectra(4, p)[0].energy.v, base)
