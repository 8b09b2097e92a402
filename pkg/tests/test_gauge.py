#
# NOTES:
#   Gauged integrands are compared after mod_derivatives on both sides
#
from fractions import Fraction

from hypothesis import given, settings, strategies as st
import pytest

from dispersym.common import UnsupportedOrder
from dispersym.gauge import (corollary_conditions, corollary_operator, gauge_conjugate,
                             mod_derivatives)
from dispersym.polynomial import I, Polynomial, coeff, im, re_
from dispersym.symbols import DiffOperator



a, b = coeff('a'), coeff('b')

F = Fraction
c, d, e = coeff('c'), coeff('d'), coeff('e')
a1, a2 = coeff('a', 1), coeff('a', 2)

# higher gauged integrands, Im(...) taken before reducing
corollary_params = [
    pytest.param(5, 2, c - (a * b).scale(F(3, 5)) + (a ** 3).scale(F(4, 25)), id='k=5-third'),
    pytest.param(5, 3, d - (b * b).scale(F(1, 5)) - (a * c).scale(F(2, 5))
                 + (a * a * b).scale(F(7, 25)) - (a ** 4).scale(F(7, 125))
                 - (a1 * b).scale(I * F(1, 5)) + (a1 * a1).scale(F(1, 5)), id='k=5-fourth'),
    pytest.param(6, 2, c - (a * b).scale(F(2, 3)) + (a ** 3).scale(F(5, 27)), id='k=6-third'),
    pytest.param(6, 3, d - (b * b).scale(F(1, 4)) - (a * c).scale(F(1, 2))
                 + (a * a * b).scale(F(3, 8)) - (a ** 4).scale(F(5, 64))
                 - (a1 * b).scale(I * F(1, 4)) + (a1 * a1).scale(F(5, 16)), id='k=6-fourth'),
    pytest.param(6, 4, e - (b * c).scale(F(1, 3)) - (a * d).scale(F(1, 3))
                 + (a * b * b).scale(F(2, 9)) + (a * a * c).scale(F(2, 9))
                 - (a ** 3 * b).scale(F(14, 81)) + (a ** 5).scale(F(7, 243))
                 - (a2 * b).scale(F(4, 9)) - (a1 * c).scale(I * F(1, 3))
                 + (a * a1 * b).scale(I * F(2, 9)) - (a * a1 * a1).scale(F(10, 27)), id='k=6-fifth'),
]

exact_derivative_params = [
    pytest.param(re_('a', 1), id='single'),
    pytest.param((re_('a') * im('a')).differentiate(), id='product'),
    pytest.param((re_('a') ** 3).differentiate(2), id='cube'),
    pytest.param((re_('a') * re_('a', 1) * im('b')).differentiate(), id='mixed'),
]
normal_form_params = [
    pytest.param(re_('a') * re_('a', 2), -(re_('a', 1) ** 2), id='parts'),
    pytest.param(re_('a', 1) * im('a'), -(re_('a') * im('a', 1)), id='swap'),
    pytest.param(im('b'), im('b'), id='underived'),
]
atoms = st.sampled_from([re_('a'), re_('a', 1), im('a'), im('a', 2), re_('b', 1)])



@pytest.mark.parametrize('poly', exact_derivative_params)
def test_exact_derivatives_vanish(poly):
    assert mod_derivatives(poly) == 0


@pytest.mark.parametrize('lhs, rhs', normal_form_params)
def test_normal_form(lhs, rhs):
    assert mod_derivatives(lhs) == mod_derivatives(rhs)


@given(st.lists(atoms, min_size=1, max_size=3), st.lists(atoms, min_size=1, max_size=3))
@settings(max_examples=30, deadline=None)
def test_normal_form_ignores_derivatives(left, right):
    p = Polynomial.constant(1)
    q = Polynomial.constant(1)

    for x in left:
        p = p * x
    for x in right:
        q = q * x

    assert mod_derivatives(p + q.differentiate()) == mod_derivatives(p)


class TestGauge:
    def test_second_order(self):
        op = DiffOperator(2, {1: a, 0: b})
        out = gauge_conjugate(op)

        assert out.phase == a
        assert out.transformed.coefficient(1) == 0
        assert out.transformed.coefficient(0) == \
            b - (a * a).scale(Fraction(1, 4)) + coeff('a', 1).scale(I / 2)

    @pytest.mark.parametrize('k', [5, 6])
    def test_removes_subprincipal(self, k):
        out = gauge_conjugate(corollary_operator(k))

        assert out.transformed.coefficient(k - 1) == 0

    @pytest.mark.parametrize('k', [5, 6])
    def test_inverse(self, k):
        op = corollary_operator(k)
        out = gauge_conjugate(op)

        assert gauge_conjugate(out.transformed, op.coefficient(k - 1), inverse=True).transformed == op

    def test_unsupported(self):
        with pytest.raises(UnsupportedOrder):
            corollary_operator(4)


class TestCorollary:
    @classmethod
    def setup_class(cls):
        cls.five = corollary_conditions(5)
        cls.six = corollary_conditions(6)

    def test_lengths(self):
        assert len(self.five) == 4
        assert len(self.six) == 5

    def test_gauge_condition(self):
        assert self.five[0].integrand == im('a')
        assert self.five[0].exponent == 0
        assert self.five[0].label == 'Im a'

    def test_exponents(self):
        assert self.five.exponents == [0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]
        assert self.six.exponents == [0] + [Fraction(m, 5) for m in range(1, 5)]

    def test_fifth_order_first(self):
        # Im(b - 2/5 a^2), the 2i a' term is an exact derivative
        expected = im('b') - (re_('a') * im('a')).scale(Fraction(4, 5))

        assert self.five[1].integrand == mod_derivatives(expected)

    def test_sixth_order_first(self):
        # b~ = b - 5/12 a^2 + (5/2) i a'
        expected = im('b') - (re_('a') * im('a')).scale(Fraction(5, 6))

        assert self.six[1].integrand == mod_derivatives(expected)

    @pytest.mark.parametrize('k, m, gauged', corollary_params)
    def test_higher_integrands(self, k, m, gauged):
        out = self.five if k == 5 else self.six

        assert out[m].integrand == mod_derivatives(gauged.imag_part())
