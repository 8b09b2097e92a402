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
from math import comb
from typing import NamedTuple

import umsg

from dispersym.common import Family, UnsupportedOrder
from dispersym.polynomial import Atom, I, Polynomial, coeff
from dispersym.recursion import ConditionEntry, ConditionSet, coefficient_name, raw_integrands
from dispersym.symbols import DiffOperator



__all__ = [
    'GaugeResult',
    'corollary_conditions',
    'corollary_operator',
    'gauge_conjugate',
    'mod_derivatives'
]

logger = logging.getLogger(__name__)

# letters of b_{k-1}, b_{k-2}, ... in the gauged statements
COROLLARY_LETTERS = {
    5: ('a', 'b', 'c', 'd'),
    6: ('a', 'b', 'c', 'd', 'e')
}



class GaugeResult(NamedTuple):
    k: int
    #: operator with vanishing D_x^{k−1} coefficient
    transformed: DiffOperator
    #: derivative of the phase integral, the original b_{k−1}
    phase: Polynomial



def gauge_conjugate(op, phase=None, inverse=False):
    """Conjugates ``op`` by φ = exp(−(i/(σk)) ∫ a), a = ``phase``.

    With w = φ⁻¹Dφ = −a/(σk), φ⁻¹ D^n φ = Σ_p C(n, p) E_{n−p} D^p where
    E_0 = 1 and E_{n+1} = w E_n − i E_n'.

    Arguments:
        op (:py:class:`~dispersym.symbols.DiffOperator`): Operator.
        phase (:py:class:`~dispersym.polynomial.Polynomial`, optional): Phase
            derivative. Defaults to the D_x^{k−1} coefficient of ``op``.
        inverse (bool): Conjugate by φ⁻¹ instead, undoing a previous gauge
            with the same ``phase``. (default: ``False``)

    Returns:
        :py:class:`GaugeResult`
    """
    k, sign = op.k, op.principal_sign
    a = op.coefficient(k - 1) if phase is None else Polynomial.lift(phase)
    w = a.scale(Fraction(1 if inverse else -1, sign * k))

    E = [Polynomial.constant(1)]

    for _ in range(k):
        E.append(w * E[-1] + E[-1].differentiate().scale(-I))

    coeffs = {}

    for p in range(k):
        total = E[k - p].scale(sign * comb(k, p))

        for j, b in op.coeffs.items():
            if j >= p:
                total = total + (b * E[j - p]).scale(comb(j, p))

        coeffs[p] = total

    out = DiffOperator(k, coeffs, op.has_dt, sign)
    umsg.log(f"gauge k={k}: {len(out.coeffs)} transformed coefficients",
             level='debug', logger=logger)

    return GaugeResult(k, out, a)



def _signature(mono):
    groups = {}
    params = []
    weight = 0

    for a in mono:
        if a.family == Family.PARAM:
            params.append(a)
            continue

        groups[(a.family, a.name)] = groups.get((a.family, a.name), 0) + 1
        weight += a.deriv

    return (tuple(sorted(groups.items())), tuple(params)), weight


def _monomial_key(mono):
    # higher derivative orders rank first, so they are the ones eliminated
    orders = tuple(sorted((a.deriv for a in mono if a.family != Family.PARAM), reverse=True))
    groups = sorted({(a.family, a.name) for a in mono if a.family != Family.PARAM})
    per_group = tuple(tuple(sorted((a.deriv for a in mono if (a.family, a.name) == g),
                                   reverse=True)) for g in groups)

    return orders, per_group


def _partitions(total, parts, cap=None):
    # non-increasing tuples of ``parts`` non-negative integers summing to total
    cap = total if cap is None else cap

    if parts == 0:
        if total == 0:
            yield ()
        return

    for first in range(min(total, cap), -1, -1):
        if first * parts < total:
            break

        for rest in _partitions(total - first, parts - 1, first):
            yield (first,) + rest


def _compositions(total, n):
    if n == 0:
        if total == 0:
            yield ()
        return

    for first in range(total + 1):
        for rest in _compositions(total - first, n - 1):
            yield (first,) + rest


def _monomials(signature, weight):
    groups, params = signature

    for split in _compositions(weight, len(groups)):
        choices = [list(_partitions(w, n)) for w, (_, n) in zip(split, groups)]

        def _build(i, acc):
            if i == len(groups):
                yield tuple(sorted(acc + params))
                return

            (family, name), _ = groups[i]

            for orders in choices[i]:
                yield from _build(i + 1, acc + tuple(Atom(family, name, d) for d in orders))

        yield from _build(0, ())


def _reduce(row, basis):
    row = dict(row)

    while True:
        hits = [m for m in row if m in basis]

        if not hits:
            return row

        m = max(hits, key=_monomial_key)
        c = row[m]

        for mono, v in basis[m].items():
            nv = row.get(mono, 0) - c * v

            if nv:
                row[mono] = nv
            else:
                row.pop(mono, None)


def mod_derivatives(p):
    """Normal form of ``p`` modulo total x-derivatives.

    Terms are grouped by their atom multiset and total derivative weight W; the
    derivatives of all weight W − 1 monomials of the group span the removable
    part. Reducing by an echelon basis of that span, pivoting on the monomial
    with the highest derivative orders, gives a unique representative, so two
    integrands differ by an exact derivative iff their normal forms agree.
    """
    p = Polynomial.lift(p)
    components = {}

    for mono, c in p.terms.items():
        sig, weight = _signature(mono)
        components.setdefault((sig, weight), {})[mono] = c

    out = {}

    for (sig, weight), part in components.items():
        if not weight:
            out.update(part)
            continue

        basis = {}

        for u in _monomials(sig, weight - 1):
            row = _reduce(Polynomial({u: 1}).differentiate().terms, basis)

            if not row:
                continue

            pivot = max(row, key=_monomial_key)
            lead = row[pivot]
            basis[pivot] = {m: v / lead for m, v in row.items()}

        out.update(_reduce(part, basis))

    return Polynomial(out)



def corollary_operator(k):
    """L = D_t − D_x^k − a D_x^{k−1} − b D_x^{k−2} − ... with lettered
    coefficients down to D_x^1."""
    if k not in COROLLARY_LETTERS:
        raise UnsupportedOrder(f"no gauged statement for k={k}")

    letters = COROLLARY_LETTERS[k]
    return DiffOperator(k, {k - 1 - i: coeff(x) for i, x in enumerate(letters)})


def corollary_conditions(k):
    """Necessary conditions of the gauged operator, written over the original
    coefficients: (Im a, 0) followed by the recursion integrands evaluated on
    the transformed coefficients b̃_j."""
    op = corollary_operator(k)
    gauged = gauge_conjugate(op).transformed

    def _rule(atom):
        if atom.family == Family.CONJ and atom.index is not None:
            return gauged.coefficient(atom.index).differentiate(atom.deriv).conjugate()
        return None

    entries = [ConditionEntry(mod_derivatives(coeff('a').imag_part()), Fraction(0), -1,
                              'conjugate', 'Im a')]

    for m, cell in enumerate(raw_integrands(k)):
        integrand = cell.substitute(_rule).conjugate().imag_part()
        entries.append(ConditionEntry(mod_derivatives(integrand), Fraction(m + 1, k - 1), m,
                                      'conjugate', f"Im {coefficient_name(k - 2 - m)}~"))

    umsg.log(f"k={k}: {len(entries)} gauged conditions", level='info', logger=logger)

    return ConditionSet(k, entries)
