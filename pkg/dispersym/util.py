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
import ast
from fractions import Fraction

import numpy as np

from dispersym.common import ParseError
from dispersym.polynomial import GaussianRational, I



__all__ = [
    'CoeffExpr',
    'parse_coeff_expr'
]

FUNCTIONS = {
    'sin': np.sin,
    'cos': np.cos,
    'exp': np.exp,
    'tanh': np.tanh
}

NAMES = ('i', 'x')

# tokens accepted where an operand is expected
OPERAND = frozenset(('number', '(', '-') + NAMES + tuple(FUNCTIONS) + ('bump',))



class CoeffExpr:
    """Base node of a coefficient expression over the real variable x.

    Nodes compare structurally, print as fully parenthesized text that parses
    back to an equal tree, evaluate on numpy arrays and differentiate
    symbolically.
    """
    __slots__ = []
    _fields = ()

    def _key(self):
        return (type(self).__name__,) + tuple(getattr(self, f) for f in self._fields)

    def __eq__(self, other):
        return isinstance(other, CoeffExpr) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        args = ', '.join(repr(getattr(self, f)) for f in self._fields)
        return f"{type(self).__name__}({args})"

    def __call__(self, x):
        return self.evaluate(x)

    def derivative(self, n=1):
        out = self

        for _ in range(n):
            out = out.diff()

        return out

    def evaluate(self, x):
        raise NotImplementedError

    def diff(self):
        raise NotImplementedError


class Const(CoeffExpr):
    __slots__ = ['value']
    _fields = ('value',)

    def __init__(self, value):
        self.value = GaussianRational.coerce(value)

    def evaluate(self, x):
        return np.full(np.shape(x), complex(self.value))

    def diff(self):
        return Const(0)

    def __str__(self):
        re, im = self.value.re, self.value.im

        if not im:
            return f"({re})"
        if not re:
            return f"({im}*i)"

        return f"({re} + {im}*i)"


class Var(CoeffExpr):
    __slots__ = []

    def evaluate(self, x):
        return np.asarray(x, dtype=complex)

    def diff(self):
        return Const(1)

    def __str__(self):
        return 'x'


class Neg(CoeffExpr):
    __slots__ = ['arg']
    _fields = ('arg',)

    def __init__(self, arg):
        self.arg = arg

    def evaluate(self, x):
        return -self.arg.evaluate(x)

    def diff(self):
        return _neg(self.arg.diff())

    def __str__(self):
        return f"(-{self.arg})"


class _Binary(CoeffExpr):
    __slots__ = ['left', 'right']
    _fields = ('left', 'right')
    op = ''

    def __init__(self, left, right):
        self.left = left
        self.right = right

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


class Add(_Binary):
    __slots__ = []
    op = '+'

    def evaluate(self, x):
        return self.left.evaluate(x) + self.right.evaluate(x)

    def diff(self):
        return _add(self.left.diff(), self.right.diff())


class Sub(_Binary):
    __slots__ = []
    op = '-'

    def evaluate(self, x):
        return self.left.evaluate(x) - self.right.evaluate(x)

    def diff(self):
        return _sub(self.left.diff(), self.right.diff())


class Mul(_Binary):
    __slots__ = []
    op = '*'

    def evaluate(self, x):
        return self.left.evaluate(x) * self.right.evaluate(x)

    def diff(self):
        return _add(_mul(self.left.diff(), self.right), _mul(self.left, self.right.diff()))

    def __str__(self):
        return f"({self.left}*{self.right})"


class Div(_Binary):
    __slots__ = []
    op = '/'

    def evaluate(self, x):
        return self.left.evaluate(x) / self.right.evaluate(x)

    def diff(self):
        num = _sub(_mul(self.left.diff(), self.right), _mul(self.left, self.right.diff()))
        return _div(num, _pow(self.right, 2))

    def __str__(self):
        return f"({self.left}/{self.right})"


class Pow(CoeffExpr):
    __slots__ = ['base', 'exponent']
    _fields = ('base', 'exponent')

    def __init__(self, base, exponent):
        self.base = base
        self.exponent = int(exponent)

    def evaluate(self, x):
        return self.base.evaluate(x) ** self.exponent

    def diff(self):
        n = self.exponent
        return _mul(_mul(Const(n), _pow(self.base, n - 1)), self.base.diff())

    def __str__(self):
        return f"({self.base}^{self.exponent})"


class Func(CoeffExpr):
    __slots__ = ['name', 'arg']
    _fields = ('name', 'arg')

    def __init__(self, name, arg):
        self.name = name
        self.arg = arg

    def evaluate(self, x):
        return FUNCTIONS[self.name](self.arg.evaluate(x))

    def diff(self):
        inner = self.arg.diff()

        if self.name == 'sin':
            outer = Func('cos', self.arg)
        elif self.name == 'cos':
            outer = _neg(Func('sin', self.arg))
        elif self.name == 'exp':
            outer = self
        else:
            outer = _sub(Const(1), _pow(self, 2))

        return _mul(outer, inner)

    def __str__(self):
        return f"{self.name}({self.arg})"


class Bump(CoeffExpr):
    """``order``-th derivative of the plateau bump centred at ``center`` with
    support of length ``width``."""
    __slots__ = ['center', 'width', 'order']
    _fields = ('center', 'width', 'order')

    def __init__(self, center, width, order=0):
        self.center = Fraction(center)
        self.width = Fraction(width)
        self.order = int(order)

    def evaluate(self, x):
        from dispersym.conditions import bump

        return np.asarray(bump(x, float(self.center), float(self.width), self.order),
                          dtype=complex)

    def diff(self):
        return Bump(self.center, self.width, self.order + 1)

    def __str__(self):
        args = f"({self.center}), ({self.width})"
        return f"bump({args}, {self.order})" if self.order else f"bump({args})"



# folding constructors, used by the parser and by differentiation
def _is(node, value):
    return isinstance(node, Const) and node.value == value


def _add(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    return Add(a, b)


def _sub(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is(b, 0):
        return a
    if _is(a, 0):
        return _neg(b)
    return Sub(a, b)


def _neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _mul(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is(a, 0) or _is(b, 0):
        return Const(0)
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if _is(a, -1):
        return _neg(b)
    if _is(b, -1):
        return _neg(a)
    return Mul(a, b)


def _div(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value / b.value)
    if _is(a, 0):
        return Const(0)
    if _is(b, 1):
        return a
    return Div(a, b)


def _pow(a, n):
    if isinstance(a, Const):
        return Const(a.value ** n)
    if n == 0:
        return Const(1)
    if n == 1:
        return a
    return Pow(a, n)



def _rewrite(text):
    """``^`` to ``**`` and ``2i`` to ``2*i``; returns the rewritten text and
    the original offset of every rewritten character."""
    out = []
    origin = []

    for pos, ch in enumerate(text):
        if ch == '^':
            out += ['*', '*']
            origin += [pos, pos]
            continue

        if (ch == 'i' and out and (out[-1].isdigit() or out[-1] == '.')
                and not (pos + 1 < len(text) and (text[pos + 1].isalnum() or text[pos + 1] == '_'))):
            out.append('*')
            origin.append(pos)

        out.append(ch)
        origin.append(pos)

    origin.append(len(text))

    return ''.join(out), origin


class _Builder(ast.NodeVisitor):
    # translates a Python expression tree into CoeffExpr nodes
    def __init__(self, source, origin):
        super().__init__()
        self.source = source
        self.origin = origin

    def fail(self, node, message, expected=OPERAND):
        pos = self.origin[min(getattr(node, 'col_offset', 0), len(self.origin) - 1)]
        raise ParseError(message, pos, expected)

    def generic_visit(self, node):
        self.fail(node, f"unsupported syntax '{type(node).__name__}'")

    def visit_Expression(self, node):
        return self.visit(node.body)

    def visit_Constant(self, node):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            self.fail(node, 'expected a number')

        # decimals are read from the literal text, exactly
        return Const(Fraction(ast.get_source_segment(self.source, node)))

    def visit_Name(self, node):
        if node.id == 'i':
            return Const(I)
        if node.id == 'x':
            return Var()

        self.fail(node, f"unknown name '{node.id}'", NAMES)

    def visit_UnaryOp(self, node):
        arg = self.visit(node.operand)

        if isinstance(node.op, ast.USub):
            return _neg(arg)
        if isinstance(node.op, ast.UAdd):
            return arg

        self.fail(node, 'unsupported unary operator', ('+', '-'))

    def visit_BinOp(self, node):
        if isinstance(node.op, ast.Pow):
            exponent = node.right

            if not (isinstance(exponent, ast.Constant) and type(exponent.value) is int):
                self.fail(exponent, 'exponent must be a non-negative integer', ('integer',))

            return _pow(self.visit(node.left), exponent.value)

        left = self.visit(node.left)
        right = self.visit(node.right)

        if isinstance(node.op, ast.Add):
            return _add(left, right)
        if isinstance(node.op, ast.Sub):
            return _sub(left, right)
        if isinstance(node.op, ast.Mult):
            return _mul(left, right)
        if isinstance(node.op, ast.Div):
            if _is(right, 0):
                self.fail(node.right, 'division by zero', ('number',))
            return _div(left, right)

        self.fail(node, 'unsupported operator', ('+', '-', '*', '/', '^'))

    def visit_Call(self, node):
        name = node.func.id if isinstance(node.func, ast.Name) else None

        if node.keywords:
            self.fail(node, 'keyword arguments are not supported', (')',))

        if name in FUNCTIONS:
            if len(node.args) != 1:
                self.fail(node, f"{name} takes one argument", (')',))
            return Func(name, self.visit(node.args[0]))

        if name == 'bump':
            if len(node.args) not in (2, 3):
                self.fail(node, 'bump takes (center, width)', (')',))

            args = [self.visit(a) for a in node.args]

            if not all(isinstance(a, Const) and a.value.is_real() for a in args):
                self.fail(node, 'bump arguments must be real constants', ('number',))
            if args[1].value.re <= 0:
                self.fail(node.args[1], 'bump width must be positive', ('number',))

            order = args[2].value.re if len(args) == 3 else 0

            if order < 0 or order.denominator != 1:
                self.fail(node.args[2], 'derivative order must be a non-negative integer',
                          ('integer',))

            return Bump(args[0].value.re, args[1].value.re, int(order))

        self.fail(node.func, f"unknown function '{name}'", tuple(FUNCTIONS) + ('bump',))


def parse_coeff_expr(text):
    """Parses a coefficient expression of x into a :py:class:`CoeffExpr`.

    The grammar is the usual arithmetic one over rational and decimal
    literals, ``i``, ``x``, ``+ - * / ^``, ``sin``, ``cos``, ``exp``, ``tanh``
    and ``bump(center, width)``. Decimals become exact rationals and constant
    subexpressions are folded.

    Arguments:
        text (str): Expression source.

    Returns:
        :py:class:`CoeffExpr`

    Raises:
        ParseError: With the offending position and the accepted tokens.
    """
    if not text or not text.strip():
        raise ParseError('empty expression', 0, OPERAND)

    if '__' in text:
        raise ParseError('invalid name', text.index('__'), NAMES)

    source, origin = _rewrite(text)

    try:
        tree = ast.parse(source, mode='eval')
    except SyntaxError as e:
        offset = max((e.offset or 1) - 1, 0)
        raise ParseError('syntax error', origin[min(offset, len(origin) - 1)], OPERAND) from None

    return _Builder(source, origin).visit(tree)
