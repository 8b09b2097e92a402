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
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
import logging
import time
from typing import Callable, NamedTuple

import umsg

from dispersym.common import Family, IdentityFailure, Mode, UnsupportedOrder, worker_count
from dispersym.polynomial import I, Polynomial, im, param, re_
from dispersym.symbols import DiffOperator, OpaqueRegistry, SymbolExpr, compose, sobolev_conjugate



__all__ = [
    'StageSpec',
    'build_stage',
    'certify_stage',
    'selfadjoint_case',
    'stage_cases',
    'verify_all',
    'verify_identity',
    'verify_selfadjoint_reduction'
]

logger = logging.getLogger(__name__)

F = Fraction



def _cx(name, deriv=0):
    # complex coefficient in canonical re + i·im form
    return re_(name, deriv) + im(name, deriv).scale(I)


def _br(n, c=1, ell=0, mode=Mode.S_ELL):
    return SymbolExpr.monomial(c, bracket=n, ell=ell, mode=mode)


def _weight(n, ell_term=False):
    # ⟨ξ⟩^{−n}, optionally with the ℓ²/2 ⟨ξ⟩^{−n−2} companion
    out = _br(-n)
    return out + _br(-n - 2, F(1, 2), ell=2) if ell_term else out


def _op(k, *parts):
    coeffs = {}

    for part in parts:
        for j, c in part.items():
            coeffs[j] = coeffs.get(j, Polynomial()) + c

    return DiffOperator(k, coeffs)



class PhaseFactors:
    """ξ-derivative combinations of a gauge phase Φ₀ appearing in the brackets:
    F = ∂_ξΦ₀, G = ∂_ξ²Φ₀ + F², H = ∂_ξ³Φ₀ + 3∂_ξ²Φ₀F + F³ and ∂_xΦ₀.
    A vanishing phase gives zero factors."""
    __slots__ = ['F', 'G', 'H', 'dx']

    def __init__(self, atom=None, registry=None):
        if atom is None:
            self.F = self.G = self.H = self.dx = SymbolExpr()
            return

        d1, d2, d3 = (SymbolExpr.opaque(atom.d_xi(n)) for n in (1, 2, 3))
        self.F = d1
        self.G = d2 + d1 * d1
        self.H = d3 + d2 * d1 * 3 + d1 * d1 * d1
        self.dx = registry.x_derivative(atom)


class _Plan(NamedTuple):
    source: DiffOperator
    target: DiffOperator
    weight: SymbolExpr
    integrand: Polynomial
    bracket: Callable


class StageSpec(NamedTuple):
    """One gauge stage L_prev ∘ Φ ≡ Φ ∘ L_next (mod order 0).

    Attributes:
        phi (SymbolExpr): e^{Φ₀} times the bracket, in S_ELL mode.
        bracket (SymbolExpr): Φ with the gauge factor pulled out.
        phi0 (OpaqueAtom): The phase, ``None`` when its integrand vanishes.
        weight (SymbolExpr): ⟨ξ⟩_ℓ prefactor of the phase integral.
        integrand (Polynomial): Imaginary part being integrated.
    """
    k: int
    index: int
    source: DiffOperator
    target: DiffOperator
    phi: SymbolExpr
    bracket: SymbolExpr
    registry: OpaqueRegistry
    phi0: object
    weight: SymbolExpr
    integrand: Polynomial

    def with_target(self, target):
        return self._replace(target=target)

    @property
    def label(self):
        return f"k={self.k} stage {self.index}"



def _k4(zeroth):
    b, c = _cx('b'), _cx('c')
    Rb, Ib = re_('b'), im('b')
    low = {0: _cx('d')} if zeroth else {}
    head = {2: Rb}

    L0 = _op(4, {2: b, 1: c}, low)
    L1 = _op(4, head, {1: c - im('b', 1).scale(F(3, 2))}, low)
    c1 = c - im('b', 1).scale(F(3, 2)) + re_('b', 1).scale(I)
    L2 = _op(4, head, {1: re_('b', 1).scale(-I) + c1.real_part()}, low)

    def _bracket(ph):
        return 1 + _br(-1, F(1, 4)) * ph.F * Rb

    return [
        _Plan(L0, L1, _weight(1).scale(F(1, 4)), Ib, _bracket),
        _Plan(L1, L2, _weight(2).scale(F(1, 4)), c1.imag_part(), _bracket)
    ]


def _k5(zeroth):
    b, c, d = _cx('b'), _cx('c'), _cx('d')
    Rb, Ib = re_('b'), im('b')
    Rb1 = re_('b', 1)
    low = {0: _cx('e')} if zeroth else {}
    fifth = F(1, 5)

    d1 = d + im('b', 2).scale(2 * I) - (Ib * Ib).scale(F(2, 5)) \
        - (b * Ib).scale(I * F(3, 5)) + (Rb * Ib).scale(I * F(1, 5))
    c1 = c - im('b', 1).scale(2) + Rb1.scale(I * F(3, 2))
    Rc1, Ic1 = c1.real_part(), c1.imag_part()
    d2 = d1 - Ic1.differentiate().scale(2) + Rc1.differentiate().scale(I)
    A1 = {3: Rb, 2: Rb1.scale(-I * F(3, 2))}

    L0 = _op(5, {3: b, 2: c, 1: d}, low)
    L1 = _op(5, {3: Rb, 2: c - im('b', 1).scale(2), 1: d1}, low)
    L2 = _op(5, A1, {2: Rc1, 1: d1 - Ic1.differentiate().scale(2)}, low)
    L3 = _op(5, A1, {2: Rc1, 1: Rc1.differentiate().scale(-I) + d2.real_part()}, low)

    def _common(ph):
        return 1 + _br(-1, fifth) * ph.F * Rb - _br(-1, F(1, 10)) * ph.G * Rb1.scale(I)

    def _stage1(ph):
        return _common(ph) + _br(-2, fifth) * ph.F * (c + _cx('b', 1).scale(2 * I))

    def _stage2(ph):
        return _common(ph) + _br(-2, F(1, 10)) * ph.F * (c1.scale(2) + Rb1.scale(I)) \
            - (ph.dx * ph.F).scale(I)

    def _stage3(ph):
        return _common(ph) + _br(-2, fifth) * ph.F * (Rc1 + Rb1.scale(I / 2))

    return [
        _Plan(L0, L1, _weight(1, True).scale(fifth), Ib, _stage1),
        _Plan(L1, L2, _weight(2).scale(fifth), Ic1, _stage2),
        _Plan(L2, L3, _weight(3).scale(fifth), d2.imag_part(), _stage3)
    ]


def _k6(zeroth):
    b, c, d, e = _cx('b'), _cx('c'), _cx('d'), _cx('e')
    Rb, Ib = re_('b'), im('b')
    Rb1, Rb2, Rb3 = re_('b', 1), re_('b', 2), re_('b', 3)
    Ib1 = im('b', 1)
    low = {0: _cx('f')} if zeroth else {}
    sixth = F(1, 6)

    d1 = d + (Ib * Ib).scale(F(1, 4)) - (Ib * Rb).scale(I / 2) + im('b', 2).scale(I * F(10, 3))
    e1_raw = e - (Ib * c).scale(I / 3) + (Ib1 * Ib).scale(I / 4) + (Rb1 * Ib).scale(F(1, 4)) \
        - (Rb * Ib1).scale(F(7, 12)) + im('b', 3).scale(F(5, 2))
    A1 = {4: Rb, 3: Rb1.scale(-2 * I), 1: Rb3.scale(-I)}
    c1 = c - Ib1.scale(F(5, 2)) + Rb1.scale(2 * I)
    Rc1, Ic1 = c1.real_part(), c1.imag_part()
    e1 = e1_raw + Rb3.scale(I)
    e2 = e1 - (Rb * Ic1).scale(I / 3) + Ic1.differentiate(2).scale(I * F(10, 3))
    d2 = d1 - Ic1.differentiate().scale(F(5, 2)) + Rc1.differentiate().scale(I * F(3, 2))
    Rd2, Id2 = d2.real_part(), d2.imag_part()
    A2 = _op(6, A1, {3: Rc1, 2: Rc1.differentiate().scale(-I * F(3, 2))}).coeffs
    A3 = _op(6, A2, {2: Rd2, 1: Rd2.differentiate().scale(-I)}).coeffs
    e3 = e2 - Id2.differentiate().scale(F(5, 2)) + Rd2.differentiate().scale(I)

    L0 = _op(6, {4: b, 3: c, 2: d, 1: e}, low)
    L1 = _op(6, {4: Rb, 3: c - Ib1.scale(F(5, 2)), 2: d1, 1: e1_raw}, low)
    L2 = _op(6, A1, {3: Rc1, 2: d1 - Ic1.differentiate().scale(F(5, 2)), 1: e2}, low)
    L3 = _op(6, A2, {2: Rd2, 1: e2 - Id2.differentiate().scale(F(5, 2))}, low)
    L4 = _op(6, A3, {1: e3.real_part()}, low)

    def _head(ph):
        return 1 + _weight(1, True).scale(sixth) * ph.F * Rb \
            - _br(-1, F(1, 12)) * ph.G * Rb1.scale(I) \
            - _br(-1, F(1, 36)) * ph.H * Rb2

    def _stage1(ph):
        return _head(ph) + _br(-2, sixth) * ph.F * (c + _cx('b', 1).scale(I * F(5, 2))) \
            + _br(-3) * ph.F * (_cx('b', 2).scale(F(-35, 72)) + _cx('c', 1).scale(I * F(5, 12))
                                + d.scale(sixth) - (b * b).scale(F(1, 24))
                                - (Rb * Rb).scale(F(1, 36))) \
            + _br(-2) * ph.G * (_cx('c', 1).scale(-I / 12) + _cx('b', 2).scale(F(5, 24))
                                + (Rb * Rb).scale(F(1, 72)))

    def _later(third):
        def _bracket(ph):
            return _head(ph) + _br(-2, sixth) * ph.F * (Rc1 + Rb1.scale(I / 2)) \
                + _br(-3) * ph.F * (third + Rb2.scale(F(25, 72)) - (Rb * Rb).scale(F(5, 72))) \
                + _br(-2) * ph.G * (Rc1.differentiate().scale(-I / 12) + Rb2.scale(F(1, 24))
                                    + (Rb * Rb).scale(F(1, 72)))
        return _bracket

    stage2 = _later(d1.scale(sixth) + c1.differentiate().scale(I * F(5, 12)))
    stage34 = _later(Rd2.scale(sixth) + Rc1.differentiate().scale(I / 6))

    return [
        _Plan(L0, L1, _weight(1, True).scale(sixth), Ib, _stage1),
        _Plan(L1, L2, _weight(2, True).scale(sixth), Ic1, stage2),
        _Plan(L2, L3, _weight(3).scale(sixth), Id2, stage34),
        _Plan(L3, L4, _weight(4).scale(sixth), e3.imag_part(), stage34)
    ]


_BUILDERS = {4: _k4, 5: _k5, 6: _k6}



def stage_cases():
    """All ``(k, i)`` stage pairs with a composition identity."""
    return [(4, 1), (4, 2), (5, 1), (5, 2), (5, 3), (6, 1), (6, 2), (6, 3), (6, 4)]


def _vanish_rule(vanish):
    vanish = {(Family(f), n) for f, n in vanish}

    def _rule(atom):
        return Polynomial() if (atom.family, atom.name) in vanish else None

    return _rule


def _substituted(op, rule):
    return DiffOperator(op.k, {j: c.substitute(rule) for j, c in op.coeffs.items()},
                        op.has_dt, op.principal_sign)


def build_stage(k, i, zeroth=False, vanish=(), registry=None):
    """Assembles stage ``i`` of the order-``k`` reduction.

    Arguments:
        k (int): 4, 5 or 6.
        i (int): Stage index, starting at 1.
        zeroth (bool): Carry a zeroth-order coefficient in every operator.
            (default: ``False``)
        vanish (iterable): ``(Family, name)`` pairs set identically to zero,
            e.g. ``[(Family.IM, 'b')]``.
        registry (:py:class:`~dispersym.symbols.OpaqueRegistry`, optional):
            Empty registry receiving the phase rule, a fresh one by default.

    Returns:
        :py:class:`StageSpec`
    """
    if (k, i) not in stage_cases():
        raise UnsupportedOrder(f"no stage {i} for k={k}")

    plan = _BUILDERS[k](zeroth)[i - 1]
    rule = _vanish_rule(vanish)
    integrand = plan.integrand.substitute(rule)
    registry = OpaqueRegistry() if registry is None else registry
    phi0 = None

    if integrand:
        phi0 = registry.declare(f"Phi0[{k},{i}]", 0, plan.weight * integrand, -(k - 1))

    bracket = plan.bracket(PhaseFactors(phi0, registry)).map_coefficients(
        lambda c: c.substitute(rule))
    phi = bracket if phi0 is None else SymbolExpr.exp(phi0) * bracket

    return StageSpec(k, i, _substituted(plan.source, rule), _substituted(plan.target, rule),
                     phi, bracket, registry, phi0, plan.weight, integrand)


def certify_stage(spec):
    """Checks order(bracket − 1) ≤ −1 in S_ELL grading and order(Φ₀) ≤ 0."""
    rest = spec.bracket - 1
    order = rest.order()

    if order > -1:
        raise IdentityFailure(rest.leading(), order, f"{spec.label} bracket")
    if spec.phi0 is not None and spec.phi0.order > 0:
        raise IdentityFailure(spec.phi0, spec.phi0.order, f"{spec.label} phase")

    return order


def _residual_report(k, stage, residual, started):
    order = residual.order()
    return {
        'k': k,
        'stage': stage,
        'residual_order': None if order == float('-inf') else order,
        'pass': not residual,
        'elapsed_ms': round((time.perf_counter() - started) * 1000, 1)
    }


def verify_identity(spec):
    """Computes L_prev ∘ Φ − Φ ∘ L_next along the positive frequency ray and
    requires every term above order 0 to cancel.

    Returns:
        dict: ``{k, stage, residual_order, pass, elapsed_ms}``

    Raises:
        IdentityFailure: With the highest surviving term.
    """
    started = time.perf_counter()
    certify_stage(spec)

    phi = spec.phi.to_mode(Mode.S)
    left = compose(spec.source.symbol(Mode.S), phi, 0, spec.registry)
    right = compose(phi, spec.target.symbol(Mode.S), 0, spec.registry)
    residual = left - right
    report = _residual_report(spec.k, spec.index, residual, started)

    if residual:
        top = residual.leading()
        umsg.log(f"{spec.label}: residual {SymbolExpr.key_label(top[0])} ({top[1]})",
                 level='info', logger=logger)
        raise IdentityFailure(top, report['residual_order'], spec.label)

    umsg.log(f"{spec.label}: identity holds ({report['elapsed_ms']} ms)",
             level='info', logger=logger)

    return report


def verify_all(k, zeroth=False):
    """Verifies every stage of order ``k`` on a thread pool."""
    stages = [i for kk, i in stage_cases() if kk == k]

    if not stages:
        raise UnsupportedOrder(f"no stages for k={k}")

    with ThreadPoolExecutor(max_workers=min(worker_count(), len(stages))) as pool:
        futures = [pool.submit(lambda i=i: verify_identity(build_stage(k, i, zeroth)))
                   for i in stages]
        return [f.result() for f in futures]



def selfadjoint_case(k, vanish=()):
    """Operator D^k + A with A self-adjoint over real atoms α, β, γ (δ), and
    the symbol Φ removing the Sobolev commutator.

    Returns:
        tuple: ``(DiffOperator, SymbolExpr)`` with Φ in S mode.
    """
    al, be, ga, de = (re_(n) for n in ('alpha', 'beta', 'gamma', 'delta'))
    s = param('s')
    S = Mode.S

    def _d(p, n=1):
        return p.differentiate(n)

    if k == 5:
        op = DiffOperator(5, {3: al, 2: be - _d(al).scale(I * F(3, 2)), 1: ga - _d(be).scale(I)})
        phi = 1 - _br(-2, mode=S) * (s * al).scale(F(1, 5)) \
            - _br(-3, mode=S) * (s * (be + _d(al).scale(I) - (s * _d(al)).scale(I / 2))).scale(F(1, 5))
    elif k == 6:
        op = DiffOperator(6, {4: al, 3: be - _d(al).scale(2 * I),
                              2: ga - _d(be).scale(I * F(3, 2)),
                              1: de - _d(ga).scale(I) - _d(al, 3).scale(I)})
        quartic = ga + _d(be).scale(I * F(3, 2)) - (s * _d(be)).scale(I / 2) \
            + (F(3, 2) + s.scale(F(3, 4)) - (s * s).scale(F(1, 6))) * _d(al, 2) \
            - (al * al).scale(F(1, 2)) - (s * al * al).scale(F(1, 12))
        phi = 1 - _br(-2, mode=S) * (s * al).scale(F(1, 6)) \
            - _br(-3, mode=S) * (s * (be + _d(al).scale(I) - (s * _d(al)).scale(I / 2))).scale(F(1, 6)) \
            - _br(-4, mode=S) * (s * quartic).scale(F(1, 6))
    else:
        raise UnsupportedOrder(f"no self-adjoint reduction for k={k}")

    rule = _vanish_rule(vanish)
    return _substituted(op, rule), phi.map_coefficients(lambda c: c.substitute(rule))


def verify_selfadjoint_reduction(k, vanish=()):
    """Checks B_s ∘ Φ − Φ ∘ B_0 has order ≤ 0, B_s = ⟨D⟩^s (D^k + A) ⟨D⟩^{−s},
    for the formal Sobolev index s."""
    started = time.perf_counter()
    op, phi = selfadjoint_case(k, vanish)
    conjugated = sobolev_conjugate(op, 0)
    residual = compose(conjugated, phi, 0) - compose(phi, op.symbol(Mode.S), 0)
    report = _residual_report(k, 'selfadjoint', residual, started)

    if residual:
        raise IdentityFailure(residual.leading(), report['residual_order'],
                              f"k={k} self-adjoint reduction")

    umsg.log(f"k={k}: self-adjoint reduction holds", level='info', logger=logger)

    return report
