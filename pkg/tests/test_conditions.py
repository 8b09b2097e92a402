#
# NOTES:
#   Hölder constants are compared against closed forms of the sampled
#   primitives; the cos case is checked against a brute force maximum of
#   2 sin(u) / sqrt(2u), which is where sin(y) - sin(x) peaks for a fixed gap
#
from fractions import Fraction

import numpy as np
import pytest

from dispersym.common import DegenerateGrid, MissingCoefficient, SupportOverflow
from dispersym.conditions import (SampledFunction, bump, check_conditions, evaluate_samples,
                                  hoelder_ratio, plateau, spectral_derivative,
                                  tarama_symbol_numeric)
from dispersym.polynomial import conj, im, re_
from dispersym.recursion import necessary_conditions



def ones(start, stop, n, value=1.0):
    return SampledFunction.from_function(lambda x: np.full(x.shape, value), start, stop, n)


plateau_params = [
    pytest.param(0.0, 1.0),
    pytest.param(1.0, 1.0),
    pytest.param(-0.5, 1.0),
    pytest.param(1.5, np.exp(1 - 1 / 0.75)),
    pytest.param(-1.5, np.exp(1 - 1 / 0.75)),
    pytest.param(2.0, 0.0),
    pytest.param(3.0, 0.0),
]
derivative_params = [
    pytest.param(1, t, id=f"n=1-t={t}") for t in (1.2, 1.5, -1.7, 0.5)
] + [
    pytest.param(2, t, id=f"n=2-t={t}") for t in (1.3, 1.6, -1.4)
]
grid_params = [
    pytest.param(0.0, 0.1, [1.0], id='one-sample'),
    pytest.param(0.0, 0.0, [1.0, 2.0], id='zero-spacing'),
    pytest.param(0.0, -1.0, [1.0, 2.0], id='negative-spacing'),
    pytest.param(0.0, 0.1, [1.0, np.nan], id='nan'),
]
closed_form_params = [
    pytest.param(1.0, 16.0, Fraction(1, 4), 8.0, id='constant-quarter'),
    pytest.param(1.0, 16.0, Fraction(1, 2), 4.0, id='constant-half'),
    pytest.param(2.0, 1.0, Fraction(0), 2.0, id='constant-zero-exponent'),
]
tarama_params = [
    pytest.param(2.0, id='quadratic-scale'),
    pytest.param(4.0, id='quartic-scale'),
]



@pytest.mark.parametrize('t, expected', plateau_params)
def test_plateau(t, expected):
    assert plateau(t) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize('n, t', derivative_params)
def test_plateau_derivatives(n, t):
    h = 1e-5
    fd = (plateau(t + h, n - 1) - plateau(t - h, n - 1)) / (2 * h)

    assert plateau(t, n) == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_plateau_array():
    t = np.linspace(-3, 3, 13)
    out = plateau(t)

    assert out.shape == t.shape
    assert np.all((out >= 0) & (out <= 1))
    assert np.array_equal(out, out[::-1])


def test_bump():
    assert bump(0.5, 0.0, 2.0) == pytest.approx(1.0)
    assert bump(1.0, 0.0, 2.0) == 0.0
    assert bump(3.0, 3.0, 1.0) == 1.0
    assert bump(0.75, 0.0, 2.0, 1) == pytest.approx(2 * plateau(1.5, 1))


@pytest.mark.parametrize('x0, dx, values', grid_params)
def test_degenerate_grid(x0, dx, values):
    with pytest.raises(DegenerateGrid):
        SampledFunction(x0, dx, values)


class TestSampledFunction:
    @classmethod
    def setup_class(cls):
        n = 64
        cls.dx = 2 * np.pi / n
        cls.f = SampledFunction(0.0, cls.dx, np.sin(cls.dx * np.arange(n)))

    def test_grid(self):
        assert self.f.n == 64
        assert self.f.grid[1] == pytest.approx(self.dx)
        assert self.f.length == pytest.approx(2 * np.pi - self.dx)

    def test_derivative(self):
        d = self.f.derivative()

        assert np.isrealobj(d.values)
        assert np.allclose(d.values, np.cos(self.f.grid), atol=1e-10)
        assert np.allclose(self.f.derivative(2).values, -self.f.values, atol=1e-10)

    def test_complex_derivative(self):
        out = spectral_derivative(np.exp(1j * self.f.grid), self.dx)

        assert np.allclose(out, 1j * np.exp(1j * self.f.grid), atol=1e-10)

    def test_same_grid(self):
        other = SampledFunction(0.0, self.dx, np.zeros(64))

        assert self.f.same_grid(other)
        assert not self.f.same_grid(SampledFunction(0.0, self.dx, np.zeros(32)))


class TestHoelder:
    @pytest.mark.parametrize('value, stop, theta, expected', closed_form_params)
    def test_closed_form(self, value, stop, theta, expected):
        out = hoelder_ratio(ones(0.0, stop, 1025, value), theta)

        assert out.sup_ratio == pytest.approx(expected, rel=1e-9)
        assert out.argmax == pytest.approx((0.0, stop))

    def test_cos(self):
        h = SampledFunction.from_function(np.cos, 0.0, 4 * np.pi, 4097)
        u = np.linspace(1e-3, 2 * np.pi, 200001)
        expected = np.max(2 * np.sin(u) / np.sqrt(2 * u))

        out = hoelder_ratio(h, Fraction(1, 2))

        assert expected == pytest.approx(1.2038, abs=1e-3)
        assert out.sup_ratio == pytest.approx(expected, rel=1e-3)

    def test_coarse_scan(self):
        out = hoelder_ratio(ones(0.0, 16.0, 4001), Fraction(1, 4), limit=1000)

        assert out.sup_ratio == pytest.approx(8.0, rel=1e-9)

    def test_profile(self):
        out = hoelder_ratio(ones(0.0, 16.0, 1025), Fraction(1, 4))
        separations = [d for d, _ in out.profile]

        assert separations == sorted(separations)
        assert max(r for _, r in out.profile) == pytest.approx(8.0)
        assert out.to_dict()['theta'] == '1/4'

    @pytest.mark.parametrize('theta', [Fraction(1), Fraction(-1, 2), 1.5])
    def test_bad_exponent(self, theta):
        with pytest.raises(ValueError):
            hoelder_ratio(ones(0.0, 1.0, 16), theta)


class TestCheckConditions:
    def test_third_order(self):
        coeffs = {'b_1': ones(0.0, 16.0, 1025, 1j)}
        report = check_conditions(3, coeffs)

        assert report.k == 3
        assert len(report.results) == 1
        assert report.results[0][1].sup_ratio == pytest.approx(4.0)

    def test_fifth_order_letters(self):
        coeffs = {name: ones(0.0, 16.0, 1025, 0.0) for name in ('b', 'c')}
        coeffs['d'] = ones(0.0, 16.0, 1025, 1j)
        report = check_conditions(5, coeffs, letters=True)
        ratios = [r.sup_ratio for _, r in report.results]

        assert ratios[:2] == [0.0, 0.0]
        assert ratios[2] == pytest.approx(2.0)
        assert [row['exponent'] for row in report.rows()] == ['1/4', '1/2', '3/4']

    def test_explicit_set(self):
        conditions = necessary_conditions(3)
        report = check_conditions(3, {'b_1': ones(0.0, 16.0, 1025, 1j)}, conditions=conditions)

        assert report.to_dict()['conditions'][0]['label'] == 'Im b_1'

    def test_missing(self):
        with pytest.raises(MissingCoefficient):
            check_conditions(3, {'b_0': ones(0.0, 1.0, 16)})
        with pytest.raises(MissingCoefficient):
            check_conditions(3, {})

    def test_grid_mismatch(self):
        coeffs = {'b_1': ones(0.0, 1.0, 16), 'b_0': ones(0.0, 2.0, 16)}

        with pytest.raises(DegenerateGrid):
            check_conditions(3, coeffs)


def test_evaluate_samples():
    x = np.linspace(0, 1, 8)
    coeffs = {'b_3': SampledFunction(0.0, x[1], 2 + 3j * np.ones(8))}
    out = evaluate_samples(re_('b_3') * im('b_3') + conj('b_3'), coeffs)

    assert np.allclose(out, 6 + 2 - 3j)


class TestTarama:
    @classmethod
    def setup_class(cls):
        cls.h = SampledFunction.from_function(lambda y: bump(y, 0.0, 2.0), -4.0, 4.0, 801)
        cls.report = tarama_symbol_numeric(cls.h, 2.0, 1.0, [4, 8, 16, 32])

    def test_brackets(self):
        assert self.report.brackets == pytest.approx([np.hypot(xi, 1.0) for xi in (4, 8, 16, 32)])
        assert len(self.report.rows()) == 4

    def test_symbol_bounded(self):
        assert self.report.h_slope == pytest.approx(0.0, abs=0.05)

    def test_defect_decay(self):
        assert self.report.defect_slope == pytest.approx(-2.0, abs=0.1)

    @pytest.mark.parametrize('q', tarama_params)
    def test_scale_exponent(self, q):
        # the defect decays like the cutoff scale <xi>^-q, H stays bounded
        report = tarama_symbol_numeric(self.h, q, 1.0, [4, 8, 16, 32])

        assert report.h_slope == pytest.approx(0.0, abs=0.05)
        assert report.defect_slope == pytest.approx(-q, abs=0.1)

    def test_support(self):
        with pytest.raises(SupportOverflow):
            tarama_symbol_numeric(ones(0.0, 1.0, 64), 2.0, 1.0, [4])
