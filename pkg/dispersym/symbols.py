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
import logging
from math import comb, factorial
from typing import NamedTuple

import umsg

from dispersym.common import (Mode, DuplicateOpaque, MissingXRule, ModeMismatch,
                              UncancelledFormalExponent)
from dispersym.polynomial import GaussianRational, I, Polynomial, param



__all__ = [
    'DiffOperator',
    'OpaqueAtom',
    'OpaqueRegistry',
    'RayOperator',
    'SymbolExpr',
    'TermKey',
    'adjoint',
    'bell_table',
    'compose',
    'declare_opaque',
    'exp_conjugate',
    'sobolev_conjugate',
    'symbol_order',
    'truncate'
]

logger = logging.getLogger(__name__)

NEG_INF = float('-inf')



class OpaqueAtom(NamedTuple):
    """Symbol factor known only through its order and its x-derivative rule,
    e.g. a Tarama-type phase and its ξ-derivatives."""
    name: str
    xi_derivs: int = 0
    x_derivs: int = 0
    base_order: int = 0

    @property
    def order(self):
        return self.base_order - self.xi_derivs

    def d_xi(self, n=1):
        return self._replace(xi_derivs=self.xi_derivs + n)

    def label(self):
        dxi = '' if not self.xi_derivs else 'dxi' if self.xi_derivs == 1 else f"dxi^{self.xi_derivs}"
        dx = '' if not self.x_derivs else 'dx' if self.x_derivs == 1 else f"dx^{self.x_derivs}"
        return f"{dx}{dxi}{'' if not dx + dxi else ' '}{self.name}"


class TermKey(NamedTuple):
    """ξ^xi ⟨ξ⟩_ℓ^(bracket + s_flag·s) ℓ^ell · Π opaques · Π e^{mult·Φ}."""
    xi: int = 0
    bracket: int = 0
    s_flag: int = 0
    ell: int = 0
    opaques: tuple = ()
    gauge: tuple = ()



def _gen_binom(a, r):
    out = Fraction(1)

    for i in range(r):
        out *= (a - i)

    return out / factorial(r)


def _merge_gauge(*factors):
    acc = {}

    for g in factors:
        for atom, mult in g:
            acc[atom] = acc.get(atom, 0) + mult

    return tuple(sorted((a, m) for a, m in acc.items() if m))


def term_order(key, mode):
    """Order bound of a single term under the grading of ``mode``."""
    if key.s_flag:
        raise UncancelledFormalExponent(f"term {key} carries an uncancelled <xi>^s factor")

    opaque = sum(a.order for a in key.opaques)

    if mode is Mode.RAY:
        return key.xi + opaque
    if mode is Mode.S_ELL:
        return key.xi + key.bracket + key.ell + opaque

    return key.xi + key.bracket + opaque


def _normalize(key, coeff, mode):
    # yields canonical (key, coeff) pairs for the grading mode
    if mode is Mode.RAY:
        if key.bracket or key.s_flag:
            raise ModeMismatch('ray mode symbols carry no <xi> factors')
        yield key, coeff
        return

    if mode is Mode.S or key.xi in (0, 1):
        if mode is Mode.S_ELL and key.xi < 0:
            raise ModeMismatch('negative powers of xi are not S_ELL symbols')
        yield key, coeff
        return

    if key.xi < 0:
        raise ModeMismatch('negative powers of xi are not S_ELL symbols')

    # xi^2 = <xi>^2 - l^2
    q, e = divmod(key.xi, 2)

    for r in range(q + 1):
        c = comb(q, r) * (-1) ** r
        yield key._replace(xi=e, bracket=key.bracket + 2 * (q - r), ell=key.ell + 2 * r), coeff.scale(c)



class SymbolExpr:
    """Graded sum of symbol terms with polynomial coefficients.

    Arguments:
        terms (dict, optional): Mapping of :py:class:`TermKey` to
            :py:class:`~dispersym.polynomial.Polynomial`.
        mode (:py:class:`~dispersym.common.Mode`): Grading mode.
            (default: ``Mode.S_ELL``)

    Attributes:
        terms (dict): Canonical, zero-free term mapping.
        mode (:py:class:`~dispersym.common.Mode`): Grading mode.
    """
    __slots__ = ['terms', 'mode']

    def __init__(self, terms=None, mode=Mode.S_ELL):
        self.mode = Mode(mode)
        self.terms = {}

        for key, c in (terms or {}).items():
            self._add(TermKey(*key), Polynomial.lift(c))

    def _add(self, key, coeff):
        if not coeff:
            return

        key = key._replace(opaques=tuple(sorted(key.opaques)), gauge=_merge_gauge(key.gauge))

        for k, c in _normalize(key, coeff, self.mode):
            v = self.terms.get(k)
            v = c if v is None else v + c

            if v:
                self.terms[k] = v
            else:
                self.terms.pop(k, None)

    @classmethod
    def _from_pairs(cls, pairs, mode):
        out = cls(mode=mode)

        for k, c in pairs:
            out._add(k, c)

        return out

    # constructors
    @classmethod
    def monomial(cls, coeff=1, xi=0, bracket=0, s_flag=0, ell=0, opaques=(),
                 gauge=(), mode=Mode.S_ELL):
        return cls({TermKey(xi, bracket, s_flag, ell, tuple(opaques), tuple(gauge)): coeff},
                   mode=mode)

    @classmethod
    def const(cls, value, mode=Mode.S_ELL):
        return cls.monomial(value, mode=mode)

    @classmethod
    def opaque(cls, atom, mode=Mode.S_ELL):
        return cls.monomial(1, opaques=(atom,), mode=mode)

    @classmethod
    def exp(cls, atom, mult=1, mode=Mode.S_ELL):
        """The gauge factor e^{mult·atom}."""
        return cls.monomial(1, gauge=((atom._replace(xi_derivs=0, x_derivs=0), mult),), mode=mode)

    def _lift(self, other):
        if isinstance(other, SymbolExpr):
            if other.mode is not self.mode:
                raise ModeMismatch(f"cannot combine {self.mode.value} and {other.mode.value} symbols")
            return other

        return SymbolExpr.const(other, self.mode)

    # arithmetic
    def __add__(self, other):
        other = self._lift(other)
        out = SymbolExpr(mode=self.mode)
        out.terms = dict(self.terms)

        for k, c in other.terms.items():
            v = out.terms.get(k)
            v = c if v is None else v + c

            if v:
                out.terms[k] = v
            else:
                out.terms.pop(k, None)

        return out

    __radd__ = __add__

    def __neg__(self):
        out = SymbolExpr(mode=self.mode)
        out.terms = {k: -v for k, v in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, SymbolExpr):
            return self.scale(other)

        other = self._lift(other)
        out = SymbolExpr(mode=self.mode)

        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                key = TermKey(k1.xi + k2.xi, k1.bracket + k2.bracket, k1.s_flag + k2.s_flag,
                              k1.ell + k2.ell, k1.opaques + k2.opaques,
                              k1.gauge + k2.gauge)
                out._add(key, c1 * c2)

        return out

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c):
        if isinstance(c, Polynomial):
            pairs = ((k, v * c) for k, v in self.terms.items())
        else:
            c = GaussianRational.coerce(c)
            pairs = ((k, v.scale(c)) for k, v in self.terms.items())

        out = SymbolExpr(mode=self.mode)
        out.terms = {k: v for k, v in pairs if v}
        return out

    def __eq__(self, other):
        if not isinstance(other, SymbolExpr):
            try:
                other = self._lift(other)
            except (TypeError, ValueError):
                return NotImplemented

        return self.mode is other.mode and self.terms == other.terms

    def __hash__(self):
        return hash((self.mode, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    # grading
    def order(self):
        """Order bound; ``-inf`` for the zero symbol."""
        return max((term_order(k, self.mode) for k in self.terms), default=NEG_INF)

    def leading(self):
        """Returns the ``(key, coefficient)`` pair of highest order."""
        if not self.terms:
            return None

        return max(self.terms.items(), key=lambda kv: (term_order(kv[0], self.mode), kv[0]))

    def to_mode(self, mode):
        mode = Mode(mode)

        if mode is self.mode:
            return self

        return SymbolExpr._from_pairs(self.terms.items(), mode)

    def ray_expand(self, m):
        """S mode only: expands every ⟨ξ⟩_ℓ power along ξ → +∞, keeping the
        terms whose order exceeds ``m``."""
        if self.mode is not Mode.S:
            raise ModeMismatch('ray expansion is defined for S mode symbols')

        pairs = []

        for key, c in self.terms.items():
            if not key.bracket:
                pairs.append((key, c))
                continue

            top = term_order(key, self.mode)
            half = Fraction(key.bracket, 2)
            r = 0

            while top - 2 * r > m:
                b = _gen_binom(half, r)

                if b:
                    pairs.append((key._replace(xi=key.xi + key.bracket - 2 * r, bracket=0,
                                               ell=key.ell + 2 * r), c.scale(b)))
                elif key.bracket > 0:
                    break
                r += 1

        return SymbolExpr._from_pairs(pairs, self.mode)

    def truncate(self, m):
        """Drops every term of order ≤ ``m``."""
        src = self.ray_expand(m) if self.mode is Mode.S else self
        out = SymbolExpr(mode=self.mode)
        out.terms = {k: v for k, v in src.terms.items() if term_order(k, self.mode) > m}
        return out

    # calculus
    def d_xi(self, n=1):
        out = self

        for _ in range(n):
            out = out._dxi()

        return out

    def _dxi(self):
        pairs = []
        s = param('s')

        for key, c in self.terms.items():
            if key.xi:
                pairs.append((key._replace(xi=key.xi - 1), c.scale(key.xi)))

            if key.bracket or key.s_flag:
                p = Polynomial.constant(key.bracket) + s.scale(key.s_flag)
                pairs.append((key._replace(xi=key.xi + 1, bracket=key.bracket - 2), c * p))

            for i, op in enumerate(key.opaques):
                ops = key.opaques[:i] + (op.d_xi(),) + key.opaques[i+1:]
                pairs.append((key._replace(opaques=ops), c))

            for atom, mult in key.gauge:
                pairs.append((key._replace(opaques=key.opaques + (atom.d_xi(),)), c.scale(mult)))

        return SymbolExpr._from_pairs(pairs, self.mode)

    def d_x(self, registry=None, n=1):
        out = self

        for _ in range(n):
            out = out._dx(registry)

        return out

    def _dx(self, registry):
        out = SymbolExpr(mode=self.mode)

        for key, c in self.terms.items():
            dc = c.differentiate()

            if dc:
                out._add(key, dc)

            if not key.opaques and not key.gauge:
                continue
            if registry is None:
                raise MissingXRule(f"no opaque registry to differentiate {key.opaques or key.gauge}")

            for i, op in enumerate(key.opaques):
                rest = SymbolExpr({key._replace(opaques=key.opaques[:i] + key.opaques[i+1:]): c},
                                  mode=self.mode)
                out = out + rest * registry.x_derivative(op, self.mode)

            for atom, mult in key.gauge:
                here = SymbolExpr({key: c}, mode=self.mode)
                out = out + (here * registry.x_derivative(atom, self.mode)).scale(mult)

        return out

    # views
    def coefficient(self, xi_pow):
        """Coefficient polynomial of the bare ``ξ^xi_pow`` term (no ℓ, brackets
        or opaque factors)."""
        return self.terms.get(TermKey(xi=xi_pow), Polynomial())

    def map_coefficients(self, func):
        """Applies ``func`` to every coefficient polynomial."""
        return SymbolExpr._from_pairs(((k, func(c)) for k, c in self.terms.items()), self.mode)

    def without_gauge(self):
        pairs = ((k._replace(gauge=()), c) for k, c in self.terms.items())
        return SymbolExpr._from_pairs(pairs, self.mode)

    @staticmethod
    def key_label(key):
        parts = []

        if key.xi:
            parts.append('xi' if key.xi == 1 else f"xi^{key.xi}")
        if key.bracket or key.s_flag:
            exp = str(key.bracket) if not key.s_flag else \
                f"{key.bracket}{'+' if key.s_flag > 0 else '-'}s" if key.bracket else \
                f"{'' if key.s_flag > 0 else '-'}s"
            parts.append(f"<xi>^({exp})")
        if key.ell:
            parts.append(f"l^{key.ell}")
        parts.extend(op.label() for op in key.opaques)
        parts.extend(f"exp({'' if m == 1 else m}{a.name})" for a, m in key.gauge)

        return '*'.join(parts) or '1'

    def rows(self):
        """Deterministic ``[{'order', 'factor', 'coefficient'}]`` listing."""
        items = sorted(self.terms.items(),
                       key=lambda kv: (-_safe_order(kv[0], self.mode), kv[0]))
        return [{'order': _safe_order(k, self.mode), 'factor': self.key_label(k),
                 'coefficient': str(c)} for k, c in items]

    def dump(self):
        if not self.terms:
            return '0'

        return '\n'.join(f"[{r['order']}] {r['factor']}: {r['coefficient']}" for r in self.rows())

    def __str__(self):
        if not self.terms:
            return '0'

        return ' + '.join(f"({r['coefficient']})*{r['factor']}" for r in self.rows())

    def __repr__(self):
        return f"SymbolExpr<{self.mode.value}, {len(self.terms)} terms>"


def _safe_order(key, mode):
    try:
        return term_order(key, mode)
    except UncancelledFormalExponent:
        return key.xi + key.bracket + key.ell



class OpaqueRegistry:
    """Holds the x-derivative rewrite rules of opaque atoms.

    A rule states ∂_x(atom) = replacement + R[atom], where R[atom] is a fresh
    atom of the declared remainder order whose x-derivatives keep that order.

    Arguments:
        remainder_prefix (str): Name prefix of the remainder atoms.
            (default: ``'R'``)
    """
    __slots__ = ['_rules', '_stable', '_cache', '_prefix']

    def __init__(self, remainder_prefix='R'):
        self._prefix = remainder_prefix
        self._rules = {}
        self._stable = {}
        self._cache = {}

    def __contains__(self, name):
        return name in self._rules or name in self._stable

    def declare(self, name, base_order=0, replacement=None, remainder_order=None):
        """Registers an opaque atom.

        Arguments:
            name (str): Unique atom name.
            base_order (int): Order of the atom itself.
            replacement (:py:class:`SymbolExpr`, optional): Principal part of
                ∂_x(atom). Without a replacement the atom is x-stable.
            remainder_order (int, optional): Order bound of ∂_x(atom) minus the
                replacement.

        Returns:
            :py:class:`OpaqueAtom`
        """
        if name in self:
            raise DuplicateOpaque(f"opaque atom '{name}' already declared")

        atom = OpaqueAtom(name, 0, 0, base_order)

        if replacement is None:
            self._stable[name] = atom
            return atom

        if remainder_order is None:
            raise ValueError('a rewrite rule needs a remainder order')
        if remainder_order > base_order:
            raise ValueError(f"remainder order {remainder_order} exceeds the atom order {base_order}")
        if replacement.to_mode(Mode.S_ELL).order() > base_order:
            raise ValueError(f"replacement for '{name}' has order above {base_order}")

        rname = f"{self._prefix}[{name}]"

        if rname in self:
            raise DuplicateOpaque(f"opaque atom '{rname}' already declared")

        self._stable[rname] = OpaqueAtom(rname, 0, 0, remainder_order)
        self._rules[name] = (replacement, self._stable[rname])
        umsg.log(f"declared {name} (order {base_order}, remainder {remainder_order})",
                 level='debug', logger=logger)

        return atom

    def remainder(self, atom):
        return self._rules[atom.name][1]

    def x_derivative(self, atom, mode=Mode.S_ELL):
        mode = Mode(mode)
        key = (atom, mode)

        if key in self._cache:
            return self._cache[key]

        if atom.name in self._stable:
            out = SymbolExpr.opaque(atom._replace(x_derivs=atom.x_derivs + 1), mode)
        elif atom.name in self._rules and not atom.x_derivs:
            replacement, rem = self._rules[atom.name]
            out = replacement.to_mode(mode).d_xi(atom.xi_derivs) \
                + SymbolExpr.opaque(rem.d_xi(atom.xi_derivs), mode)
        else:
            raise MissingXRule(f"no x-derivative rule for '{atom.label()}'")

        self._cache[key] = out
        return out



class DiffOperator:
    """D_t − sign·D_x^k − Σ_j coeffs[j](x) D_x^j.

    :py:meth:`symbol` returns the spatial symbol sign·ξ^k + Σ coeffs[j] ξ^j;
    the D_t part commutes with x-independent gauges and is not carried.

    Arguments:
        k (int): Principal order, at least 2.
        coeffs (dict, optional): Mapping of order ``j`` (0 ≤ j < k) to
            :py:class:`~dispersym.polynomial.Polynomial`.
        has_dt (bool): Whether the operator carries a D_t. (default: ``True``)
        principal_sign (int): Sign of the D_x^k term. (default: 1)
    """
    __slots__ = ['k', 'coeffs', 'has_dt', 'principal_sign']

    def __init__(self, k, coeffs=None, has_dt=True, principal_sign=1):
        if k < 2:
            raise ValueError('operators need principal order k >= 2')

        self.k = k
        self.has_dt = has_dt
        self.principal_sign = 1 if principal_sign >= 0 else -1
        self.coeffs = {}

        for j, c in (coeffs or {}).items():
            if not 0 <= j < k:
                raise ValueError(f"coefficient order {j} outside 0..{k - 1}")

            c = Polynomial.lift(c)

            if c:
                self.coeffs[j] = c

    def coefficient(self, j):
        return self.coeffs.get(j, Polynomial())

    def symbol(self, mode=Mode.S_ELL):
        out = SymbolExpr.monomial(self.principal_sign, xi=self.k, mode=mode)

        for j, c in self.coeffs.items():
            out = out + SymbolExpr.monomial(c, xi=j, mode=mode)

        return out

    def replace(self, **coeffs):
        """Copy with coefficients replaced, keyed ``c<j>``."""
        new = dict(self.coeffs)
        new.update({int(k[1:]): v for k, v in coeffs.items()})
        return DiffOperator(self.k, new, self.has_dt, self.principal_sign)

    def __eq__(self, other):
        if not isinstance(other, DiffOperator):
            return NotImplemented

        return (self.k, self.has_dt, self.principal_sign, self.coeffs) == \
               (other.k, other.has_dt, other.principal_sign, other.coeffs)

    def __hash__(self):
        return hash((self.k, self.principal_sign, frozenset(self.coeffs.items())))

    def rows(self):
        return [{'order': j, 'coefficient': str(self.coeffs[j])}
                for j in sorted(self.coeffs, reverse=True)]

    def __repr__(self):
        lower = ' '.join(f"- ({c}) D^{j}" for j, c in sorted(self.coeffs.items(), reverse=True))
        return f"DiffOperator(D_t - {'' if self.principal_sign > 0 else '-'}D^{self.k} {lower})"



class RayOperator:
    """D_t − Σ ξ^l · cells[(l, j)] · D_x^j, the large-ξ conjugated form used by
    the recursion.

    Arguments:
        k (int): Principal order of the underlying operator.
        cells (dict): Mapping ``(l, j)`` to polynomial.
    """
    __slots__ = ['k', 'cells']

    def __init__(self, k, cells=None):
        self.k = k
        self.cells = {key: Polynomial.lift(v) for key, v in (cells or {}).items()
                      if Polynomial.lift(v)}

    @classmethod
    def from_operator(cls, op):
        cells = {(0, j): c for j, c in op.coeffs.items()}
        cells[(0, op.k)] = Polynomial.constant(op.principal_sign)
        return cls(op.k, cells)

    def cell(self, l, j):
        return self.cells.get((l, j), Polynomial())

    def items(self):
        return sorted(self.cells.items(), key=lambda kv: (-kv[0][0], kv[0][1]))

    def __eq__(self, other):
        if not isinstance(other, RayOperator):
            return NotImplemented

        return self.k == other.k and self.cells == other.cells

    def __hash__(self):
        return hash((self.k, frozenset(self.cells.items())))

    def __repr__(self):
        return f"RayOperator(k={self.k}, {len(self.cells)} cells)"



def symbol_order(e):
    return e.order()


def truncate(e, m):
    return e.truncate(m)


def declare_opaque(registry, name, base_order=0, replacement=None, remainder_order=None):
    return registry.declare(name, base_order, replacement, remainder_order)


def compose(a, b, cutoff=0, registry=None):
    """Asymptotic composition Σ_j (i^{−j}/j!) ∂_ξ^j a · ∂_x^j b, truncated at
    ``cutoff``. The expansion runs until the next term's order bound drops to
    the cutoff.

    Arguments:
        a (:py:class:`SymbolExpr`): Left symbol.
        b (:py:class:`SymbolExpr`): Right symbol.
        cutoff (int): Terms of order ≤ cutoff are discarded. (default: 0)
        registry (:py:class:`OpaqueRegistry`, optional): x-derivative rules for
            opaque atoms in ``b``.

    Returns:
        :py:class:`SymbolExpr`
    """
    b = a._lift(b)

    if not a or not b:
        return SymbolExpr(mode=a.mode)

    oa, ob = a.order(), b.order()

    if a.mode is Mode.S:
        a = a.truncate(cutoff - ob)
        b = b.truncate(cutoff - oa)

    out = SymbolExpr(mode=a.mode)
    da, db = a, b
    j = 0

    while oa - j + ob > cutoff and da and db:
        out = out + (da * db).scale((-I) ** j / factorial(j))
        j += 1
        da = da.d_xi().truncate(cutoff - ob)
        db = db.d_x(registry).truncate(cutoff - (oa - j))

    return out.truncate(cutoff)


def adjoint(op):
    """Formal adjoint of ``op``: B_j = Σ_{l ≥ j} C(l, j) D^{l−j} conj(b_l),
    with D = −i∂_x."""
    out = {}

    for l, b in op.coeffs.items():
        bb = b.conjugate()

        for j in range(l + 1):
            term = bb.differentiate(l - j).scale((-I) ** (l - j) * comb(l, j))
            out[j] = out.get(j, Polynomial()) + term

    return DiffOperator(op.k, out, op.has_dt, op.principal_sign)


def bell_table(a_prime, nmax, qmax=None):
    """Coefficients c_{n,q} of e^{−φ} D^n e^{φ} = Σ_q ξ^{−mq} c_{n,q} for a phase
    φ = a/ξ^m with a' = ``a_prime``: c_{0,0} = 1 and
    c_{n+1,q} = −i a' c_{n,q−1} − i ∂c_{n,q}."""
    w = Polynomial.lift(a_prime).scale(-I)
    table = {(0, 0): Polynomial.constant(1)}

    for n in range(nmax):
        top = n + 1 if qmax is None else min(n + 1, qmax)

        for q in range(top + 1):
            val = Polynomial()

            if q and (n, q - 1) in table:
                val = val + w * table[(n, q - 1)]
            if (n, q) in table:
                val = val + table[(n, q)].differentiate().scale(-I)
            if val:
                table[(n + 1, q)] = val

    return table


def exp_conjugate(op, a_prime, m, floor=None):
    """Conjugates ``op`` by the phase e^{a/ξ^m}.

    Arguments:
        op (:py:class:`RayOperator` or :py:class:`DiffOperator`): Operator.
        a_prime (:py:class:`~dispersym.polynomial.Polynomial`): Derivative of the
            phase numerator.
        m (int): Phase decay power, at least 1.
        floor (int, optional): Cells with l below ``floor`` are dropped.

    Returns:
        :py:class:`RayOperator` with new[l − mq, p] = Σ P[l, j] C(j, p) c_{j−p, q}.
    """
    if m < 1:
        raise ValueError('phase power m must be at least 1')
    if isinstance(op, DiffOperator):
        op = RayOperator.from_operator(op)
    if not op.cells:
        return RayOperator(op.k)

    jmax = max(j for _, j in op.cells)
    lmax = max(l for l, _ in op.cells)
    qmax = None if floor is None else max(0, (lmax - floor) // m)
    table = bell_table(a_prime, jmax, qmax)
    new = {}

    for (l, j), cell in op.cells.items():
        for p in range(j + 1):
            for q in range(j - p + 1):
                c = table.get((j - p, q))

                if c is None:
                    continue

                nl = l - m * q

                if floor is not None and nl < floor:
                    continue

                new[(nl, p)] = new.get((nl, p), Polynomial()) + (cell * c).scale(comb(j, p))

    return RayOperator(op.k, new)


def sobolev_conjugate(op, cutoff=0):
    """⟨D⟩^s ∘ P ∘ ⟨D⟩^{−s} in S mode with ``s`` a formal parameter atom. The
    weight uses the same ⟨ξ⟩_ℓ as the stage symbols."""
    p = op.symbol(Mode.S)
    po = p.order()
    weight = SymbolExpr.monomial(1, s_flag=1, mode=Mode.S)
    inverse = SymbolExpr.monomial(1, s_flag=-1, mode=Mode.S)
    out = SymbolExpr(mode=Mode.S)
    dw, dp = weight, p
    j = 0

    while po - j > cutoff and dp:
        out = out + (dw * inverse * dp).scale((-I) ** j / factorial(j))
        j += 1
        dw = dw.d_xi()
        dp = dp.d_x()

    return out.truncate(cutoff)
