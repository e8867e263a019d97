"""Second-order forward-mode jets."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from numdiff import relative_error, richardson
from xyqfi import autodiff as ad
from xyqfi.autodiff import Jet2
from xyqfi.errors import DomainError, SingularityError

UNARY = [
    ("exp", ad.exp, math.exp, 0.7),
    ("log", ad.log, math.log, 1.9),
    ("sqrt", ad.sqrt, math.sqrt, 2.3),
    ("sin", ad.sin, math.sin, 0.4),
    ("cos", ad.cos, math.cos, 1.1),
    ("sinh", ad.sinh, math.sinh, -0.8),
    ("cosh", ad.cosh, math.cosh, 0.6),
    ("reciprocal", ad.reciprocal, lambda x: 1.0 / x, 1.7),
    ("trigamma", ad.trigamma, lambda x: float(special.polygamma(1, x)), 0.35),
]


class TestElementaryFunctions:
    @pytest.mark.parametrize("name, jet_fn, ref_fn, x", UNARY, ids=[u[0] for u in UNARY])
    def test_derivatives_match_finite_differences(self, name, jet_fn, ref_fn, x):
        out = jet_fn(Jet2.variable(x))
        d1, d2 = richardson(ref_fn, x)
        assert out.v == pytest.approx(ref_fn(x), rel=1e-14)
        assert relative_error(out.d1, d1) <= 1e-7
        assert relative_error(out.d2, d2) <= 1e-6

    def test_chain_rule_through_composition(self):
        def f(x):
            return math.exp(math.sin(x) * x**2) / (1.0 + x)

        x = 0.8
        xj = Jet2.variable(x)
        out = ad.exp(ad.sin(xj) * xj**2) / (1.0 + xj)
        d1, d2 = richardson(f, x)
        assert relative_error(out.d1, d1) <= 1e-8
        assert relative_error(out.d2, d2) <= 1e-7

    @pytest.mark.parametrize("n", [-3, -1, 0, 1, 2, 5])
    def test_integer_powers(self, n):
        x = 1.3
        out = Jet2.variable(x) ** n
        assert out.v == pytest.approx(x**n)
        assert out.d1 == pytest.approx(n * x ** (n - 1))
        assert out.d2 == pytest.approx(n * (n - 1) * x ** (n - 2), abs=1e-14)

    def test_real_power_rejected(self):
        with pytest.raises(TypeError):
            Jet2.variable(1.0) ** 0.5


class TestPolarPair:
    @pytest.mark.parametrize("t", [0.3, 1.7, -0.4])
    def test_atan2_and_hypot(self, t):
        def x_of(s):
            return math.cos(3 * s) + 0.2

        def y_of(s):
            return s**2 - 0.5

        s = Jet2.variable(t)
        xs, ys = ad.cos(3 * s) + 0.2, s**2 - 0.5
        angle, radius = ad.atan2(ys, xs), ad.hypot(xs, ys)
        for jet, ref in ((angle, lambda v: math.atan2(y_of(v), x_of(v))),
                         (radius, lambda v: math.hypot(x_of(v), y_of(v)))):
            d1, d2 = richardson(ref, t)
            assert relative_error(jet.d1, d1) <= 1e-7
            assert relative_error(jet.d2, d2) <= 1e-6

    def test_atan2_origin_raises(self):
        with pytest.raises(SingularityError):
            ad.atan2(0.0, 0.0)

    def test_polar_pins_angle_at_origin(self):
        x = Jet2(np.array([0.0, 1.0]), np.array([1.0, 0.0]), np.zeros(2))
        y = Jet2(np.array([0.0, 1.0]), np.zeros(2), np.zeros(2))
        r, theta = ad.polar(x, y)
        assert theta.v[0] == 0.0 and theta.d1[0] == 0.0
        assert theta.v[1] == pytest.approx(math.pi / 4)
        assert r.v[1] == pytest.approx(math.sqrt(2))


class TestJetContainer:
    def test_constant_has_zero_derivatives(self):
        c = Jet2.constant(np.array([1.0, 2.0]))
        assert c.is_constant()
        assert not Jet2.variable(1.0).is_constant()

    def test_numpy_left_operand_returns_jet(self):
        out = np.array([1.0, 2.0]) * Jet2.variable(3.0)
        assert isinstance(out, Jet2)
        assert np.allclose(out.d1, [1.0, 2.0])

    def test_sum_and_indexing(self):
        j = Jet2(np.array([1.0, 2.0, 3.0]), 1.0, 0.5)
        total = j.sum()
        assert (total.v, total.d1, total.d2) == (6.0, 3.0, 1.5)
        assert j[1].v == 2.0 and j[1].d1 == 1.0

    def test_division_by_zero_raises(self):
        with pytest.raises(SingularityError):
            Jet2.variable(1.0) / 0.0
        with pytest.raises(SingularityError):
            ad.reciprocal(Jet2.variable(0.0))

    @pytest.mark.parametrize("fn, x", [(ad.log, 0.0), (ad.sqrt, -1.0), (ad.trigamma, 0.0)])
    def test_domain_errors(self, fn, x):
        with pytest.raises((DomainError, SingularityError)):
            fn(Jet2.variable(x))


class TestAlgebraicProperties:
    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
    @settings(max_examples=60)
    def test_product_rule(self, a, b, x):
        xj = Jet2.variable(x)
        f, g = a * xj + 1.0, xj * xj + b
        prod = f * g
        assert prod.d1 == pytest.approx(f.d1 * g.v + f.v * g.d1, abs=1e-9)
        assert prod.d2 == pytest.approx(f.d2 * g.v + 2 * f.d1 * g.d1 + f.v * g.d2, abs=1e-9)

    @given(st.floats(0.1, 5.0))
    @settings(max_examples=60)
    def test_exp_log_inverse(self, x):
        out = ad.exp(ad.log(Jet2.variable(x)))
        assert out.v == pytest.approx(x, rel=1e-13)
        assert out.d1 == pytest.approx(1.0, rel=1e-12)
        assert out.d2 == pytest.approx(0.0, abs=1e-11)
