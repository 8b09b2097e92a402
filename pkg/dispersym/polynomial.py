# Copyright 2024-2025 dispersym developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# libraries
from fractions import Fraction
import re
from typing import NamedTuple

import numpy as np

from dispersym.common import Family



__all__ = [
    'Atom',
    'GaussianRational',
    'I',
    'Polynomial',
    'canonicalize_complex',
    'coeff',
    'conj',
    'differentiate',
    'im',
    'param',
    'poly_arith',
    're_',
    'support_band'
]

_INDEX = re.compile(r'_(\d+)$')



class GaussianRational:
    """Exact complex number with rational real and imaginary parts.

    Arguments:
        re: Real part, anything :py:class:`fractions.Fraction` accepts.
        im: Imaginary part. (default: 0)
    """
    __slots__ = ['re', 'im']

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, value):
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        if isinstance(value, tuple):
            return cls(*value)

        return cls(value)

    def __add__(self, other):
        if not isinstance(other, _SCALARS):
            return NotImplemented

        other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, _SCALARS):
            return NotImplemented

        other = GaussianRational.coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, _SCALARS):
            return NotImplemented

        other = GaussianRational.coerce(other)
        return GaussianRational(self.re * other.re - self.im * other.im,
                                self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, _SCALARS):
            return NotImplemented

        other = GaussianRational.coerce(other)
        norm = other.re * other.re + other.im * other.im

        if not norm:
            raise ZeroDivisionError('division by zero Gaussian rational')

        return self * GaussianRational(other.re / norm, -other.im / norm)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pow__(self, n):
        if n < 0:
            return GaussianRational(1) / (self ** -n)

        out = GaussianRational(1)

        for _ in range(n):
            out = out * self

        return out

    def __eq__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented

        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def is_real(self):
        return self.im == 0

    def __str__(self):
        sign = '-' if self.im < 0 else '+'
        return f"{self.re}{sign}{abs(self.im)}*i"

    def __repr__(self):
        return f"GaussianRational({self.re!s}, {self.im!s})"

    def pretty(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return 'i' if self.im == 1 else '-i' if self.im == -1 else f"{self.im}i"

        sign = '-' if self.im < 0 else '+'
        return f"({self.re}{sign}{abs(self.im)}i)"


#: imaginary unit
I = GaussianRational(0, 1)
ZERO = GaussianRational(0)
ONE = GaussianRational(1)

_SCALARS = (int, float, Fraction, complex, GaussianRational)


class Atom(NamedTuple):
    """Indeterminate x_α^(β): a coefficient function (or a formal parameter)
    differentiated ``deriv`` times. Tuple order (family, name, deriv) is the
    canonical atom order."""
    family: Family
    name: str
    deriv: int = 0

    @property
    def index(self):
        """Numeric suffix of names such as ``b_3``, or ``None``."""
        m = _INDEX.search(self.name)
        return int(m[1]) if m else None

    def shift(self, n=1):
        return Atom(self.family, self.name, self.deriv + n)

    def label(self):
        if self.family == Family.PARAM:
            return self.name

        primes = "'" * self.deriv if self.deriv <= 3 else f"^({self.deriv})"

        if self.family == Family.RE:
            return f"Re[{self.name}]{primes}"
        if self.family == Family.IM:
            return f"Im[{self.name}]{primes}"
        if self.family == Family.CONJ:
            return f"conj[{self.name}]{primes}"

        return f"{self.name}{primes}"

    def dump(self):
        return f"{self.family.name.lower()}:{self.name}:{self.deriv}"



class Polynomial:
    """Sparse polynomial over :py:class:`Atom` indeterminates with
    :py:class:`GaussianRational` coefficients.

    Monomials are sorted tuples of atoms, repeated atoms encode powers. Zero
    coefficients are never stored, so structural equality is polynomial
    equality.

    Arguments:
        terms (dict, optional): Mapping of monomial tuple to coefficient.

    Attributes:
        terms (dict): Canonical monomial to coefficient mapping.
    """
    __slots__ = ['terms']

    def __init__(self, terms=None):
        self.terms = {}

        for mono, c in (terms or {}).items():
            c = GaussianRational.coerce(c)

            if c:
                key = tuple(sorted(mono))
                self.terms[key] = self.terms.get(key, ZERO) + c

        self.terms = {k: v for k, v in self.terms.items() if v}

    @classmethod
    def _raw(cls, terms):
        # trusted constructor, keys already canonical and values non-zero
        obj = cls.__new__(cls)
        obj.terms = terms
        return obj

    @classmethod
    def constant(cls, value):
        value = GaussianRational.coerce(value)
        return cls._raw({(): value} if value else {})

    @classmethod
    def atom(cls, atom):
        return cls._raw({(atom,): ONE})

    @staticmethod
    def lift(value):
        if isinstance(value, Polynomial):
            return value

        return Polynomial.constant(value)

    # ring operations
    def __add__(self, other):
        if not isinstance(other, (Polynomial,) + _SCALARS):
            return NotImplemented

        other = Polynomial.lift(other)
        out = dict(self.terms)

        for mono, c in other.terms.items():
            v = out.get(mono, ZERO) + c

            if v:
                out[mono] = v
            else:
                out.pop(mono, None)

        return Polynomial._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, (Polynomial,) + _SCALARS):
            return NotImplemented
        return self + (-Polynomial.lift(other))

    def __rsub__(self, other):
        return Polynomial.lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            if not isinstance(other, _SCALARS):
                return NotImplemented
            return self.scale(other)

        out = {}

        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = tuple(sorted(m1 + m2)) if m1 and m2 else m1 or m2
                v = out.get(mono, ZERO) + c1 * c2

                if v:
                    out[mono] = v
                else:
                    out.pop(mono, None)

        return Polynomial._raw(out)

    def __rmul__(self, other):
        if not isinstance(other, _SCALARS):
            return NotImplemented
        return self.scale(other)

    def __pow__(self, n):
        if n < 0:
            raise ValueError('negative powers are not polynomial')

        out = Polynomial.constant(1)
        base = self

        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1

        return out

    def scale(self, c):
        c = GaussianRational.coerce(c)

        if not c:
            return Polynomial()

        return Polynomial._raw({k: v * c for k, v in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational, complex)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented

        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    # inspection
    def is_constant(self):
        return all(not m for m in self.terms)

    def constant_term(self):
        return self.terms.get((), ZERO)

    def coefficient(self, *atoms):
        return self.terms.get(tuple(sorted(atoms)), ZERO)

    def atoms(self):
        return {a for m in self.terms for a in m}

    def degree(self):
        return max((len(m) for m in self.terms), default=0)

    def support_band(self):
        """Returns ``(min α, max α)`` over indexed atoms, ``None`` if there are none."""
        idx = [a.index for a in self.atoms() if a.index is not None]
        return (min(idx), max(idx)) if idx else None

    def items(self):
        return sorted(self.terms.items())

    # calculus
    def differentiate(self, n=1):
        """Total x-derivative, applied ``n`` times (Leibniz rule atom-wise)."""
        out = self

        for _ in range(n):
            out = out._d()

        return out

    def _d(self):
        acc = {}

        for mono, c in self.terms.items():
            for i, a in enumerate(mono):
                if a.family == Family.PARAM:
                    continue

                new = tuple(sorted(mono[:i] + (a.shift(),) + mono[i+1:]))
                v = acc.get(new, ZERO) + c

                if v:
                    acc[new] = v
                else:
                    acc.pop(new, None)

        return Polynomial._raw(acc)

    def conjugate(self):
        """Complex conjugation: i → −i, coeff ↔ conj; real atoms are fixed."""
        swap = {Family.COEFF: Family.CONJ, Family.CONJ: Family.COEFF}
        out = {}

        for mono, c in self.terms.items():
            key = tuple(sorted(Atom(swap.get(a.family, a.family), a.name, a.deriv)
                               for a in mono))
            out[key] = out.get(key, ZERO) + c.conjugate()

        return Polynomial(out)

    def substitute(self, rule):
        """Replaces atoms. ``rule`` is a mapping or a callable returning a
        replacement :py:class:`Polynomial` (or ``None`` to keep the atom)."""
        lookup = rule.get if hasattr(rule, 'get') else rule
        cache = {}
        out = Polynomial()

        for mono, c in self.terms.items():
            term = Polynomial.constant(c)

            for a in mono:
                if a not in cache:
                    rep = lookup(a)
                    cache[a] = Polynomial.atom(a) if rep is None else Polynomial.lift(rep)
                term = term * cache[a]

            out = out + term

        return out

    def canonicalize_complex(self):
        """Rewrites coeff/conj atoms as Re ± i·Im atoms."""
        def _rule(a):
            if a.family == Family.COEFF:
                return re_(a.name, a.deriv) + im(a.name, a.deriv).scale(I)
            if a.family == Family.CONJ:
                return re_(a.name, a.deriv) - im(a.name, a.deriv).scale(I)
            return None

        if not any(a.family in (Family.COEFF, Family.CONJ) for a in self.atoms()):
            return self

        return self.substitute(_rule)

    def real_part(self):
        p = self.canonicalize_complex()
        return Polynomial({k: v.re for k, v in p.terms.items()})

    def imag_part(self):
        p = self.canonicalize_complex()
        return Polynomial({k: v.im for k, v in p.terms.items()})

    def evaluate(self, env):
        """Numeric evaluation. ``env`` maps :py:class:`Atom` to numbers or
        numpy arrays; missing atoms raise ``KeyError``."""
        total = 0

        for mono, c in self.terms.items():
            term = complex(c)

            for a in mono:
                term = term * np.asarray(env[a])

            total = total + term

        return total

    # text forms
    def dump(self):
        """Deterministic text dump: one ``coefficient<TAB>atoms`` line per monomial."""
        if not self.terms:
            return '0'

        return '\n'.join(f"{c}\t{' '.join(a.dump() for a in m) or '1'}"
                         for m, c in self.items())

    def __str__(self):
        if not self.terms:
            return '0'

        parts = []

        for mono, c in self.items():
            factors = []
            i = 0

            while i < len(mono):
                j = i
                while j < len(mono) and mono[j] == mono[i]:
                    j += 1
                factors.append(mono[i].label() + (f"^{j - i}" if j - i > 1 else ''))
                i = j

            if not factors:
                parts.append(c.pretty())
            elif c == ONE:
                parts.append('*'.join(factors))
            elif c == -ONE:
                parts.append('-' + '*'.join(factors))
            else:
                parts.append(f"{c.pretty()}*{'*'.join(factors)}")

        return ' + '.join(parts).replace('+ -', '- ')

    def __repr__(self):
        return f"Polynomial({str(self)!r})"



def var(family, name, deriv=0):
    return Polynomial.atom(Atom(Family(family), name, deriv))


def coeff(name, deriv=0):
    return var(Family.COEFF, name, deriv)


def conj(name, deriv=0):
    return var(Family.CONJ, name, deriv)


def re_(name, deriv=0):
    return var(Family.RE, name, deriv)


def im(name, deriv=0):
    return var(Family.IM, name, deriv)


def param(name='s'):
    return var(Family.PARAM, name, 0)


def poly_arith(p, q, kind):
    """Exact ring arithmetic. ``kind`` is ``'add'``, ``'sub'``, ``'mul'`` or
    ``'scale'`` (``q`` is then a scalar)."""
    if kind == 'add':
        return Polynomial.lift(p) + q
    if kind == 'sub':
        return Polynomial.lift(p) - q
    if kind == 'mul':
        return Polynomial.lift(p) * Polynomial.lift(q)
    if kind == 'scale':
        return Polynomial.lift(p).scale(q)

    raise ValueError(f"Unknown arithmetic kind: {kind}")


def differentiate(p, n=1):
    return Polynomial.lift(p).differentiate(n)


def conjugate(p):
    return Polynomial.lift(p).conjugate()


def canonicalize_complex(p):
    return Polynomial.lift(p).canonicalize_complex()


def support_band(p):
    return Polynomial.lift(p).support_band()
