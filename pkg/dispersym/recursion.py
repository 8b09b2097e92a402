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

from dispersym.common import Family, StructuralViolation, UnsupportedOrder
from dispersym.polynomial import Atom, I, Polynomial, coeff, conj
from dispersym.symbols import DiffOperator, RayOperator, adjoint, exp_conjugate



__all__ = [
    'ConditionEntry',
    'ConditionSet',
    'RecursionState',
    'base_case',
    'check_structure',
    'iterate',
    'necessary_conditions',
    'raw_integrands',
    'recursion_step',
    'lettered_conditions',
    'verify_structure'
]

logger = logging.getLogger(__name__)

MAX_K = 8

# coefficient letters, highest order first
LETTERS = {
    4: ('b', 'c', 'd'),
    5: ('b', 'c', 'd', 'e'),
    6: ('b', 'c', 'd', 'e', 'f')
}



def coefficient_name(j):
    return f"b_{j}"


def _check_k(k, low=2, high=MAX_K):
    if not low <= k <= high:
        raise UnsupportedOrder(f"operator order k={k} outside {low}..{high}")


def in_band(p, low, high):
    """Membership test for the class of polynomials in x_α^(β), low ≤ α ≤ high.
    An empty index range admits constants only."""
    band = p.support_band()

    if band is None:
        return True

    low = max(low, 0)

    if low > high:
        return False

    return low <= band[0] and band[1] <= high



class RecursionState:
    """One level of the conjugated adjoint table.

    Arguments:
        k (int): Principal order.
        m (int): Recursion level.
        table (dict): ``(l, j)`` to :py:class:`~dispersym.polynomial.Polynomial`
            for l ≤ k − 2; vanishing cells are not stored.
        floor (int, optional): Lowest l kept, ``None`` for the full table.
    """
    __slots__ = ['k', 'm', 'table', 'floor']

    def __init__(self, k, m, table, floor=None):
        self.k = k
        self.m = m
        self.floor = floor
        self.table = {key: v for key, v in table.items() if v}

    def cell(self, l, j):
        return self.table.get((l, j), Polynomial())

    def operator(self):
        """The table plus the k ξ^{k−1} D_x transport cell."""
        cells = dict(self.table)
        cells[(self.k - 1, 1)] = Polynomial.constant(self.k)
        return RayOperator(self.k, cells)

    def rows(self):
        return [{'l': l, 'j': j, 'poly': str(p)}
                for (l, j), p in sorted(self.table.items(), key=lambda kv: (-kv[0][0], kv[0][1]))]

    def to_dict(self):
        return {'k': self.k, 'm': self.m, 'cells': self.rows()}

    def __repr__(self):
        return f"RecursionState(k={self.k}, m={self.m}, {len(self.table)} cells)"



def base_case(k):
    """Level 0: the adjoint L* written around the plane wave e^{ixξ+itξ^k}.

    P[l, j] = C(j+l, l) B_{j+l} for j + l ≤ k − 2 and P[l, k−l] = C(k, l), with
    B_j the adjoint coefficients over conjugate atoms.
    """
    _check_k(k)

    op = DiffOperator(k, {j: coeff(coefficient_name(j)) for j in range(k - 1)})
    B = adjoint(op)
    table = {}

    for l in range(k - 1):
        for j in range(k - 1 - l):
            table[(l, j)] = B.coefficient(j + l).scale(comb(j + l, l))

        table[(l, k - l)] = Polynomial.constant(comb(k, l))

    return RecursionState(k, 0, table)


def recursion_step(state, floor=None):
    """Removes the next ξ^{k−1−m} zeroth-order cell by an e^{φ/ξ^m} phase.

    Arguments:
        state (:py:class:`RecursionState`): Level m − 1.
        floor (int, optional): Drop cells with l below ``floor``; cells with
            l ≥ floor are exact since conjugation only lowers l.

    Returns:
        :py:class:`RecursionState` at level m.

    Raises:
        StructuralViolation: The cancelled cell or any structural property fails.
    """
    k = state.k
    m = state.m + 1

    if m > k - 2:
        raise UnsupportedOrder(f"recursion for k={k} stops at level {k - 2}")

    if floor is None:
        floor = state.floor

    # ∂_x φ = (i/k) P[k−1−m, 0], conjugating by e^{−φ/ξ^m}
    a_prime = state.cell(k - 1 - m, 0).scale(-I / k)
    new = exp_conjugate(state.operator(), a_prime, m, floor=floor)
    cells = dict(new.cells)

    if cells.pop((k - 1, 1), None) != Polynomial.constant(k):
        raise StructuralViolation((m, k - 1, 1), 'i', 'transport cell changed')

    out = RecursionState(k, m, cells, floor)
    check_structure(out)
    umsg.log(f"k={k}: level {m} has {len(out.table)} cells", level='debug', logger=logger)

    return out


def check_structure(state):
    """Asserts the three support properties of a level.

    Returns:
        list: One ``{'m', 'l', 'j', 'property', 'pass'}`` row per checked cell.

    Raises:
        StructuralViolation: On the first failing cell.
    """
    k, m = state.k, state.m
    top = k - 2
    rows = []

    def _record(l, j, prop, ok, detail=''):
        rows.append({'m': m, 'l': l, 'j': j, 'property': prop, 'pass': ok})

        if not ok:
            raise StructuralViolation((m, l, j), prop, detail)

    for l in range(k - m - 1, top + 1):
        cell = state.cell(l, 0)
        _record(l, 0, 'ii', not cell, str(cell))

    for mp in range(m, top + 1):
        l = top - mp
        rest = state.cell(l, 0) - conj(coefficient_name(l))
        _record(l, 0, 'iii', in_band(rest, k - 1 - mp, top), str(rest))

    for l in range(top + 1):
        for j in range(1, k + 1):
            cell = state.cell(l, j)
            _record(l, j, 'iv', in_band(cell, min(j + l, k - 1 - m), top), str(cell))

    return rows


def iterate(k, levels=None, floor=0):
    """Yields the states of levels 0..``levels`` (default k − 2)."""
    state = base_case(k)
    check_structure(state)
    yield state

    for _ in range(k - 2 if levels is None else levels):
        state = recursion_step(state, floor=floor)
        yield state


def verify_structure(k):
    """Runs the full recursion and returns every structural check performed."""
    rows = []
    state = base_case(k)
    rows.extend(check_structure(state))

    for _ in range(k - 2):
        state = recursion_step(state, floor=0)
        rows.extend(check_structure(state))

    return rows


def raw_integrands(k):
    """Cells P[k−2−m, 0] at level m, for m = 0..k−3, over conjugate atoms."""
    _check_k(k, 3)

    return [s.cell(k - 2 - s.m, 0) for s in iterate(k, k - 3)]



class ConditionEntry(NamedTuple):
    #: Polynomial whose integral over [x, y] must be Hölder bounded
    integrand: Polynomial
    #: Hölder exponent
    exponent: Fraction
    #: Recursion level (or stage) the integrand comes from
    stage: int
    #: ``'conjugate'`` when the integrand is written over unconjugated coefficients
    sign_convention: str = 'conjugate'
    label: str = ''


class ConditionSet:
    """Ordered list of ``(integrand, exponent)`` necessary conditions.

    Arguments:
        k (int): Principal order.
        entries (list): :py:class:`ConditionEntry` items.
    """
    __slots__ = ['k', 'entries']

    def __init__(self, k, entries=None):
        self.k = k
        self.entries = list(entries or [])

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def exponents(self):
        return [e.exponent for e in self.entries]

    def relabel(self, names):
        """Renames coefficient atoms, e.g. ``{'b_3': 'b'}``."""
        def _rule(a):
            if a.family != Family.PARAM and a.name in names:
                return Polynomial.atom(Atom(a.family, names[a.name], a.deriv))
            return None

        return ConditionSet(self.k, [e._replace(integrand=e.integrand.substitute(_rule))
                                     for e in self.entries])

    def rows(self):
        return [{'stage': e.stage, 'label': e.label, 'integrand': str(e.integrand),
                 'exponent': str(e.exponent), 'convention': e.sign_convention}
                for e in self.entries]

    def to_dict(self):
        return {'k': self.k, 'entries': self.rows()}



def necessary_conditions(k):
    """Integrands Im(conj P[k−2−m, 0]) modulo exact derivatives, with Hölder
    exponents (m+1)/(k−1). Conjugating the cell rewrites it over the
    unconjugated coefficients b_α; the imaginary part only changes sign."""
    from dispersym.gauge import mod_derivatives

    _check_k(k, 3)
    entries = []

    for m, cell in enumerate(raw_integrands(k)):
        integrand = mod_derivatives(cell.conjugate().imag_part())
        entries.append(ConditionEntry(integrand, Fraction(m + 1, k - 1), m, 'conjugate',
                                      f"Im {coefficient_name(k - 2 - m)}"))

    return ConditionSet(k, entries)


def lettered_conditions(k):
    """:py:func:`necessary_conditions` with b_{k−2}, b_{k−3}, ... renamed to the
    letters b, c, d, ... used for the fourth to sixth order statements."""
    if k not in LETTERS:
        raise UnsupportedOrder(f"no letter naming for k={k}")

    names = {coefficient_name(k - 2 - i): x for i, x in enumerate(LETTERS[k])}
    out = necessary_conditions(k).relabel(names)

    return ConditionSet(k, [e._replace(label=f"Im {LETTERS[k][e.stage]}")
                            for e in out])
