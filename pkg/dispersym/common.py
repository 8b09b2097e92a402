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
from enum import Enum, IntEnum
import json
import os



class Family(IntEnum):
    """Atom families of the coefficient polynomial ring. The integer value
    fixes the canonical ordering of atoms inside a monomial."""
    #: Real part of a coefficient function
    RE = 0
    #: Imaginary part of a coefficient function
    IM = 1
    #: Complex coefficient function, before canonicalization
    COEFF = 2
    #: Complex conjugate of a coefficient function
    CONJ = 3
    #: Formal parameter (the Sobolev index `s`), constant in x
    PARAM = 4


class Mode(Enum):
    """Grading modes for symbol expressions."""
    #: Formal large-ξ calculus, negative powers of ξ permitted, no brackets
    RAY = 'ray'
    #: ⟨ξ⟩_ℓ based classes, ℓ graded with weight 1
    S_ELL = 's_ell'
    #: ℓ fixed, graded along the positive frequency ray
    S = 's'


class Integrator(Enum):
    #: Strang splitting: exact dispersive half steps around a variable-coefficient step
    SPLITTING = 'splitting'
    #: Integrating factor for the principal part, classical RK4 for the rest
    RK4 = 'rk4'


class Formats(Enum):
    #:
    JSON = 'json'
    #:
    TEXT = 'text'


# worker cap for thread pools
THREADS_ENV = 'DISPERSYM_THREADS'



class DispersymError(Exception):
    """Base class for all package errors."""


class UncancelledFormalExponent(DispersymError):
    """A symbol term still carries a ⟨ξ⟩^{±s} factor and cannot be graded."""


class MissingXRule(DispersymError):
    """An opaque atom must be x-differentiated but has no rewrite rule."""


class DuplicateOpaque(DispersymError, ValueError):
    """An opaque atom name is already registered."""


class ModeMismatch(DispersymError, ValueError):
    """Symbols of different grading modes were combined."""


class StructuralViolation(DispersymError):
    """A recursion table cell broke one of the structural properties.

    Arguments:
        cell (tuple): ``(m, l, j)`` of the failing cell.
        prop (str): Property label, one of ``'ii'``, ``'iii'``, ``'iv'``.
    """
    def __init__(self, cell, prop, detail=''):
        self.cell = cell
        self.prop = prop
        super().__init__(f"property ({prop}) fails at cell {cell}{': ' if detail else ''}{detail}")


class IdentityFailure(DispersymError):
    """A composition identity left a residual above the allowed order.

    Arguments:
        term: The highest order residual term, as a ``(key, coefficient)`` pair.
        order (int): Order of the offending term.
    """
    def __init__(self, term, order, label=''):
        self.term = term
        self.order = order
        super().__init__(f"{label + ': ' if label else ''}residual of order {order}: {term}")


class DegenerateGrid(DispersymError, ValueError):
    """Sampled function with fewer than two points or a non-positive spacing."""


class MissingCoefficient(DispersymError, KeyError):
    """A condition integrand needs a coefficient that was not supplied."""


class SupportOverflow(DispersymError):
    """Compactly supported data reaches the edge of the sampling window."""


class BlowupDetected(DispersymError):
    """Solution norm crossed the overflow guard."""


class StabilityViolation(DispersymError):
    """Time step exceeds the stability rule for the variable-coefficient part."""


class NoPacket(DispersymError):
    """Wavepacket vanishes identically, ratios are undefined."""


class ParseError(DispersymError, ValueError):
    """Coefficient expression could not be parsed.

    Arguments:
        message (str): Error description.
        position (int): Zero based offset into the source text.
        expected (iterable): Tokens that would have been accepted.
    """
    def __init__(self, message, position=0, expected=()):
        self.position = position
        self.expected = tuple(sorted(expected))
        _exp = f" (expected one of: {', '.join(self.expected)})" if self.expected else ''
        super().__init__(f"{message} at position {position}{_exp}")


class UnsupportedOrder(DispersymError, ValueError):
    """Requested operator order is outside the configured bounds."""



def worker_count():
    """Returns the thread pool size, capped by ``DISPERSYM_THREADS``."""
    cap = os.environ.get(THREADS_ENV)

    try:
        return max(1, int(cap)) if cap else (os.cpu_count() or 1)
    except ValueError:
        return os.cpu_count() or 1


def format(type, data, fields, options=None):
    try:
        _func = _formatters[type.lower()]
    except KeyError:
        raise NameError(f"Unknown format type: {type}")

    return _func(data, fields, options)


def fmt_tabulate(data, fields, options=None):
    from tabulate import tabulate

    kwargs = {'headers': fields}

    if options:
        kwargs.update({x: options[x] for x in options
                            if x not in ['type']
                      })

    return tabulate([[r.get(_) for _ in fields] for r in data], **kwargs)


def fmt_json(data, fields, options=None):
    kwargs = {'indent': 2, 'default': str}

    if options:
        kwargs.update({x: options[x] for x in options
                            if x not in ['type']
                      })

    return json.dumps([{_: r.get(_) for _ in fields} for r in data], **kwargs)



_formatters = {
    Formats.TEXT.value: fmt_tabulate,
    'tabulate': fmt_tabulate,
    Formats.JSON.value: fmt_json
}
