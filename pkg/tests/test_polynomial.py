#
# NOTES:
#   Exact arithmetic only, every comparison here is structural equality
#
from fractions import Fraction

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from dispersym.common import Family
from dispersym.polynomial import (Atom, GaussianRational, I, Polynomial, coeff, conj,
                                  im, param, poly_arith, re_)



a = coeff('b_3')
b = coeff('b_2')
abar = conj('b_3')
s = param('s')

ratios = st.fractions(min_value=-5, max_value=5, max_denominator=7)
gaussians = st.builds(GaussianRational, ratios, ratios)
atoms = st.sampled_from([a, b, abar, coeff('b_3', 1), re_('b_1'), im('b_1', 2), s])


@st.composite
def polynomials(draw, size=4):
    out = Polynomial()

    for _ in range(draw(st.integers(0, size))):
        term = Polynomial.constant(draw(gaussians))

        for _ in range(draw(st.integers(0, 3))):
            term = term * draw(atoms)

        out = out + term

    return out


gaussian_params = [
    pytest.param(GaussianRational(1, 2) * GaussianRational(3, -1), GaussianRational(5, 5)),
    pytest.param(I * I, GaussianRational(-1)),
    pytest.param(GaussianRational(1, 1) / GaussianRational(1, -1), I),
    pytest.param(GaussianRational(0, 2) ** 3, GaussianRational(0, -8)),
    pytest.param(GaussianRational(2) ** -1, GaussianRational(Fraction(1, 2))),
    pytest.param(GaussianRational.coerce(0.5 - 0.25j), GaussianRational(Fraction(1, 2), Fraction(-1, 4))),
]
pretty_params = [
    pytest.param(GaussianRational(3), '3'),
    pytest.param(I, 'i'),
    pytest.param(-I, '-i'),
    pytest.param(GaussianRational(0, Fraction(2, 5)), '2/5i'),
    pytest.param(GaussianRational(1, -2), '(1-2i)'),
]
band_params = [
    pytest.param(a * b, (2, 3)),
    pytest.param(a + coeff('b_0'), (0, 3)),
    pytest.param(s * s, None),
    pytest.param(Polynomial.constant(4), None),
]
arith_params = [
    pytest.param(a, b, 'add', a + b),
    pytest.param(a, b, 'sub', a - b),
    pytest.param(a, b, 'mul', a * b),
    pytest.param(a, I, 'scale', a.scale(I)),
]



@pytest.mark.parametrize('value, expected', gaussian_params)
def test_gaussian_arithmetic(value, expected):
    assert value == expected


@pytest.mark.parametrize('value, expected', pretty_params)
def test_gaussian_pretty(value, expected):
    assert value.pretty() == expected


def test_gaussian_zero_division():
    with pytest.raises(ZeroDivisionError):
        GaussianRational(1, 1) / 0


@pytest.mark.parametrize('poly, expected', band_params)
def test_support_band(poly, expected):
    assert poly.support_band() == expected


@pytest.mark.parametrize('p, q, kind, expected', arith_params)
def test_poly_arith(p, q, kind, expected):
    assert poly_arith(p, q, kind) == expected


def test_poly_arith_unknown():
    with pytest.raises(ValueError):
        poly_arith(a, b, 'div')


def test_negative_power():
    with pytest.raises(ValueError):
        a ** -1


class TestRing:
    @given(polynomials(), polynomials(), polynomials())
    @settings(max_examples=40, deadline=None)
    def test_associative(self, p, q, r):
        assert (p + q) + r == p + (q + r)
        assert (p * q) * r == p * (q * r)

    @given(polynomials(), polynomials(), polynomials())
    @settings(max_examples=40, deadline=None)
    def test_distributive(self, p, q, r):
        assert p * (q + r) == p * q + p * r

    @given(polynomials(), polynomials())
    @settings(max_examples=40, deadline=None)
    def test_commutative(self, p, q):
        assert p + q == q + p
        assert p * q == q * p

    @given(polynomials())
    @settings(max_examples=40, deadline=None)
    def test_inverse(self, p):
        assert not (p - p)
        assert p - p == 0

    @given(polynomials(), st.integers(0, 3))
    @settings(max_examples=25, deadline=None)
    def test_power(self, p, n):
        expected = Polynomial.constant(1)

        for _ in range(n):
            expected = expected * p

        assert p ** n == expected


class TestCalculus:
    @given(polynomials(), polynomials())
    @settings(max_examples=40, deadline=None)
    def test_leibniz(self, p, q):
        assert (p * q).differentiate() == p.differentiate() * q + p * q.differentiate()

    @given(polynomials(), polynomials())
    @settings(max_examples=40, deadline=None)
    def test_linear(self, p, q):
        assert (p + q).differentiate(2) == p.differentiate(2) + q.differentiate(2)

    def test_param_is_constant(self):
        assert (s * s).differentiate() == 0
        assert (s * a).differentiate() == s * coeff('b_3', 1)

    def test_atom_shift(self):
        assert a.differentiate(3) == coeff('b_3', 3)
        assert (a ** 2).differentiate() == a * coeff('b_3', 1) * 2


class TestConjugation:
    @given(polynomials())
    @settings(max_examples=40, deadline=None)
    def test_involution(self, p):
        assert p.conjugate().conjugate() == p

    @given(polynomials(), polynomials())
    @settings(max_examples=40, deadline=None)
    def test_multiplicative(self, p, q):
        assert (p * q).conjugate() == p.conjugate() * q.conjugate()

    def test_swaps_families(self):
        assert (a.scale(I)).conjugate() == abar.scale(-I)
        assert re_('b_1').conjugate() == re_('b_1')

    def test_canonicalize(self):
        out = (a * abar).canonicalize_complex()

        assert out == re_('b_3') ** 2 + im('b_3') ** 2
        assert out.imag_part() == 0
        assert (a - abar).real_part() == 0
        assert (a - abar).imag_part() == im('b_3').scale(2)

    @given(polynomials())
    @settings(max_examples=40, deadline=None)
    def test_real_plus_imag(self, p):
        c = p.canonicalize_complex()

        assert c == p.real_part() + p.imag_part().scale(I)


class TestInspection:
    @classmethod
    def setup_class(cls):
        cls.p = a * a * b.scale(Fraction(3, 2)) + s.scale(I) + 7

    def test_degree(self):
        assert self.p.degree() == 3
        assert Polynomial().degree() == 0

    def test_coefficient(self):
        assert self.p.coefficient(Atom(Family.COEFF, 'b_3'), Atom(Family.COEFF, 'b_3'),
                                  Atom(Family.COEFF, 'b_2')) == Fraction(3, 2)
        assert self.p.constant_term() == 7
        assert not self.p.is_constant()

    def test_atoms(self):
        assert self.p.atoms() == {Atom(Family.COEFF, 'b_3'), Atom(Family.COEFF, 'b_2'),
                                  Atom(Family.PARAM, 's')}

    def test_substitute(self):
        out = self.p.substitute({Atom(Family.COEFF, 'b_2'): Polynomial.constant(2)})

        assert out == a * a * 3 + s.scale(I) + 7

    def test_evaluate(self):
        env = {Atom(Family.COEFF, 'b_3'): np.array([1.0, 2.0]),
               Atom(Family.COEFF, 'b_2'): np.array([2.0, 2.0]),
               Atom(Family.PARAM, 's'): 0.0}

        assert np.allclose(self.p.evaluate(env), [10.0, 19.0])

    def test_evaluate_missing(self):
        with pytest.raises(KeyError):
            self.p.evaluate({})

    def test_dump_deterministic(self):
        q = Polynomial.constant(7) + s.scale(I) + b.scale(Fraction(3, 2)) * a * a

        assert self.p.dump() == q.dump()
        assert Polynomial().dump() == '0'

    def test_str(self):
        assert str(a * a) == 'b_3^2'
        assert str(-abar) == '-conj[b_3]'
        assert str(Polynomial()) == '0'
