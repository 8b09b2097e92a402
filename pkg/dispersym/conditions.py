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
from typing import NamedTuple

import numpy as np
from numpy.polynomial import Polynomial as NumPoly
from scipy.integrate import cumulative_trapezoid, trapezoid
import umsg

from dispersym.common import (DegenerateGrid, Family, MissingCoefficient,
                              SupportOverflow, worker_count)



__all__ = [
    'ConditionReport',
    'HoelderReport',
    'SampledFunction',
    'TaramaReport',
    'bump',
    'check_conditions',
    'condition_set',
    'evaluate_samples',
    'hoelder_ratio',
    'plateau',
    'spectral_derivative',
    'tarama_symbol_numeric'
]

logger = logging.getLogger(__name__)

# full O(N²) pair scan up to this many samples, coarse-to-fine above
PAIR_SCAN_LIMIT = 8192
SUPPORT_TOL = 1e-12



# numerators P_n of g^(n)(s) = g(s) P_n(s) / (1 − s²)^{2n}, g(s) = exp(1 − 1/(1 − s²))
_PLATEAU_NUMERATORS = [NumPoly([1.0])]


def _numerator(n):
    one_minus = NumPoly([1.0, 0.0, -1.0])
    s = NumPoly([0.0, 1.0])

    while len(_PLATEAU_NUMERATORS) <= n:
        j = len(_PLATEAU_NUMERATORS) - 1
        p = _PLATEAU_NUMERATORS[j]
        _PLATEAU_NUMERATORS.append(p.deriv() * one_minus ** 2 + 4 * j * s * one_minus * p
                                   - 2 * s * p)

    return _PLATEAU_NUMERATORS[n]


def plateau(t, n=0):
    """The mollified plateau χ and its derivatives.

    χ(t) = 1 for |t| ≤ 1, exp(1 − 1/(1 − (|t| − 1)²)) for 1 < |t| < 2 and 0
    beyond, so χ is smooth with support in (−2, 2).

    Arguments:
        t (array_like): Evaluation points.
        n (int): Derivative order. (default: 0)

    Returns:
        numpy.ndarray (or float for scalar input)
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    a = np.abs(t)
    out = np.zeros_like(t)

    if n == 0:
        out[a <= 1] = 1.0

    mask = (a > 1) & (a < 2)
    s = a[mask] - 1
    den = 1 - s ** 2
    g = np.exp(1 - 1 / den)

    if n == 0:
        out[mask] = g
    else:
        out[mask] = np.sign(t[mask]) ** n * g * _numerator(n)(s) / den ** (2 * n)

    return float(out[0]) if scalar else out


def bump(x, center=0.0, width=2.0, n=0):
    """χ translated to ``center`` and scaled so its support has length ``width``."""
    scale = 4.0 / width
    return scale ** n * plateau(scale * (np.asarray(x, dtype=float) - center), n)



class SampledFunction:
    """Values of a function on the uniform grid x₀ + jΔx, j = 0..N−1.

    Arguments:
        x0 (float): Left end of the grid.
        dx (float): Grid spacing.
        values (array_like): Samples, real or complex.

    Raises:
        DegenerateGrid: Fewer than two samples, non-positive spacing or
            non-finite samples.
    """
    __slots__ = ['x0', 'dx', 'values']

    def __init__(self, x0, dx, values):
        values = np.asarray(values)

        if values.ndim != 1 or values.size < 2:
            raise DegenerateGrid(f"need at least two samples, got {values.size}")
        if not dx > 0:
            raise DegenerateGrid(f"grid spacing must be positive, got {dx}")
        if not np.all(np.isfinite(values)):
            raise DegenerateGrid('samples must be finite')

        self.x0 = float(x0)
        self.dx = float(dx)
        self.values = values

    @classmethod
    def from_function(cls, func, start, stop, n):
        """Samples ``func`` at ``n`` points spanning [start, stop]."""
        if n < 2:
            raise DegenerateGrid(f"need at least two samples, got {n}")

        x = np.linspace(start, stop, n)
        return cls(start, x[1] - x[0], func(x))

    @property
    def n(self):
        return self.values.size

    @property
    def grid(self):
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def length(self):
        return self.dx * (self.n - 1)

    def same_grid(self, other):
        return (self.n == other.n and np.isclose(self.x0, other.x0)
                and np.isclose(self.dx, other.dx))

    def derivative(self, order=1):
        return SampledFunction(self.x0, self.dx, spectral_derivative(self.values, self.dx, order))

    def __repr__(self):
        return f"SampledFunction(x0={self.x0}, dx={self.dx}, n={self.n})"



def spectral_derivative(values, dx, order=1):
    """FFT derivative of the periodic extension of ``values``. Real input
    gives real output."""
    values = np.asarray(values)

    if order == 0:
        return values.copy()

    n = values.size

    if np.isrealobj(values):
        k = 2 * np.pi * np.fft.rfftfreq(n, d=dx)
        mult = (1j * k) ** order

        if order % 2 and n % 2 == 0:
            mult[-1] = 0

        return np.fft.irfft(mult * np.fft.rfft(values), n)

    k = 2 * np.pi * np.fft.fftfreq(n, d=dx)
    mult = (1j * k) ** order

    if order % 2 and n % 2 == 0:
        mult[n // 2] = 0

    return np.fft.ifft(mult * np.fft.fft(values))



class HoelderReport(NamedTuple):
    theta: Fraction
    #: sup over grid pairs of |H(y) − H(x)| / |y − x|^θ
    sup_ratio: float
    #: maximizing pair (x, y)
    argmax: tuple
    #: ``(separation, max ratio)`` per power-of-two separation bucket
    profile: list

    def to_dict(self):
        return {'theta': str(self.theta), 'sup_ratio': self.sup_ratio,
                'argmax': list(self.argmax),
                'profile': [{'separation': d, 'ratio': r} for d, r in self.profile]}


def _scan(H, dx, theta, separations):
    # best ratio per separation index d, over all pairs (j, j + d)
    out = []

    for d in separations:
        diff = np.abs(H[d:] - H[:-d])
        j = int(np.argmax(diff))
        out.append((d, j, diff[j] / (d * dx) ** theta))

    return out


def _pair_scan(H, dx, theta, separations):
    chunks = np.array_split(np.asarray(separations), worker_count())
    chunks = [c for c in chunks if c.size]

    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = pool.map(lambda c: _scan(H, dx, theta, c), chunks)

    return [row for part in parts for row in part]


def hoelder_ratio(h, theta, limit=PAIR_SCAN_LIMIT):
    """Window-restricted Hölder constant of the primitive of ``h``.

    The primitive H is the cumulative trapezoid integral of the samples; the
    ratio |H(y) − H(x)| / |y − x|^θ is maximized over all grid pairs. Grids
    longer than ``limit`` are scanned on a strided subgrid first and the
    maximizing pair is then refined on the full grid around that pair.

    Arguments:
        h (:py:class:`SampledFunction`): Integrand samples.
        theta (Fraction): Hölder exponent in [0, 1).
        limit (int): Largest grid scanned pair by pair.

    Returns:
        :py:class:`HoelderReport`

    Raises:
        DegenerateGrid: For fewer than two samples.
        ValueError: ``theta`` outside [0, 1).
    """
    if h.n < 2:
        raise DegenerateGrid(f"need at least two samples, got {h.n}")
    if not 0 <= theta < 1:
        raise ValueError(f"Hölder exponent must lie in [0, 1), got {theta}")

    H = cumulative_trapezoid(h.values, dx=h.dx, initial=0)
    th = float(theta)
    stride = 1 if h.n <= limit else -(-h.n // limit)

    coarse = H[::stride]
    rows = _pair_scan(coarse, h.dx * stride, th, range(1, coarse.size))
    d, j, best = max(rows, key=lambda r: r[2])
    i0, i1 = j * stride, (j + d) * stride

    if stride > 1:
        # refine both ends within one coarse cell
        lo0, hi0 = max(i0 - stride, 0), min(i0 + stride, h.n - 1)
        lo1, hi1 = max(i1 - stride, 0), min(i1 + stride, h.n - 1)
        a = np.arange(lo0, hi0 + 1)[:, None]
        b = np.arange(lo1, hi1 + 1)[None, :]
        sep = np.abs(b - a)
        with np.errstate(divide='ignore', invalid='ignore'):
            ratio = np.where(sep > 0, np.abs(H[b] - H[a]) / (sep * h.dx) ** th, 0.0)
        ia, ib = np.unravel_index(np.argmax(ratio), ratio.shape)

        if ratio[ia, ib] > best:
            best, i0, i1 = float(ratio[ia, ib]), int(a[ia, 0]), int(b[0, ib])

    buckets = {}

    for d_, _, r in rows:
        key = 1 << (int(d_) * stride).bit_length() - 1
        buckets[key] = max(buckets.get(key, 0.0), float(r))

    profile = [(key * h.dx, buckets[key]) for key in sorted(buckets)]
    grid = h.grid
    lo, hi = sorted((i0, i1))

    umsg.log(f"hoelder theta={theta}: sup {best:.6g} on [{grid[lo]:.4g}, {grid[hi]:.4g}]",
             level='debug', logger=logger)

    return HoelderReport(Fraction(theta), float(best), (float(grid[lo]), float(grid[hi])),
                         profile)



class ConditionReport(NamedTuple):
    k: int
    #: ``(ConditionEntry, HoelderReport)`` pairs in condition order
    results: list

    def rows(self):
        return [{'stage': e.stage, 'label': e.label, 'integrand': str(e.integrand),
                 'exponent': str(e.exponent), 'sup_ratio': r.sup_ratio,
                 'argmax': list(r.argmax)}
                for e, r in self.results]

    def to_dict(self):
        return {'k': self.k, 'conditions': self.rows(),
                'note': 'window-restricted constants, necessary evidence only'}


def _atom_samples(atom, coeffs, cache):
    if atom.family == Family.PARAM:
        raise MissingCoefficient(f"formal parameter {atom.name} has no samples")

    if atom.name not in coeffs:
        raise MissingCoefficient(atom.name)

    key = (atom.name, atom.deriv)

    if key not in cache:
        f = coeffs[atom.name]
        cache[key] = spectral_derivative(f.values, f.dx, atom.deriv)

    v = cache[key]

    if atom.family == Family.RE:
        return np.real(v)
    if atom.family == Family.IM:
        return np.imag(v)
    if atom.family == Family.CONJ:
        return np.conj(v)

    return v


def evaluate_samples(poly, coeffs, cache=None):
    """Evaluates a coefficient polynomial pointwise on sampled coefficients,
    derivatives taken spectrally.

    Raises:
        MissingCoefficient: ``poly`` mentions a name absent from ``coeffs``.
    """
    cache = {} if cache is None else cache
    n = next(iter(coeffs.values())).n
    env = {a: _atom_samples(a, coeffs, cache) for a in poly.atoms()}

    return np.broadcast_to(np.asarray(poly.evaluate(env), dtype=complex), (n,)).copy()


def condition_set(k, gauged=False, letters=False):
    """Condition list for ``k``: the recursion integrands over b_j names, the
    lettered form, or the gauged form."""
    from dispersym.gauge import corollary_conditions
    from dispersym.recursion import necessary_conditions, lettered_conditions

    if gauged:
        return corollary_conditions(k)
    if letters:
        return lettered_conditions(k)

    return necessary_conditions(k)


def check_conditions(k, coeffs, gauged=False, letters=False, conditions=None):
    """Evaluates every condition integrand on sampled coefficients and reports
    its window-restricted Hölder constant.

    Arguments:
        k (int): Principal order.
        coeffs (dict): Coefficient name to :py:class:`SampledFunction`, all on
            one grid. Names follow the chosen condition set (``b_3`` or ``b``).
        gauged (bool): Use the gauged conditions. (default: ``False``)
        letters (bool): Use lettered coefficient names. (default: ``False``)
        conditions (:py:class:`~dispersym.recursion.ConditionSet`, optional):
            Explicit condition set, overriding the flags.

    Returns:
        :py:class:`ConditionReport`

    Raises:
        MissingCoefficient: An integrand needs a coefficient not supplied.
        DegenerateGrid: Coefficients sampled on different grids.
    """
    if conditions is None:
        conditions = condition_set(k, gauged, letters)

    samples = list(coeffs.values())

    if not samples:
        raise MissingCoefficient('no coefficients supplied')

    ref = samples[0]

    if any(not ref.same_grid(f) for f in samples[1:]):
        raise DegenerateGrid('coefficients must share one grid')

    cache = {}
    results = []

    for entry in conditions:
        values = evaluate_samples(entry.integrand, coeffs, cache)

        if np.max(np.abs(values.imag), initial=0) > 1e-9 * max(1.0, np.max(np.abs(values.real))):
            umsg.log(f"{entry.label}: integrand has a non-real part, using the real part",
                     level='warning', logger=logger)

        report = hoelder_ratio(SampledFunction(ref.x0, ref.dx, values.real.copy()),
                               entry.exponent)
        results.append((entry, report))
        umsg.log(f"k={k} {entry.label}: sup {report.sup_ratio:.6g} at theta {entry.exponent}",
                 level='info', logger=logger)

    return ConditionReport(k, results)



class TaramaReport(NamedTuple):
    q: float
    ell: float
    #: ⟨ξ⟩_ℓ per sweep point
    brackets: list
    #: max_x |H(x, ξ)| per sweep point
    h_max: list
    #: max_x |∂_x H − h| per sweep point
    defect_max: list
    #: log-log slope of ``h_max`` against ⟨ξ⟩_ℓ, ``None`` when H vanishes
    h_slope: float
    defect_slope: float

    def rows(self):
        return [{'bracket': b, 'h_max': h, 'defect_max': d}
                for b, h, d in zip(self.brackets, self.h_max, self.defect_max)]


def _slope(brackets, values):
    values = np.asarray(values)

    if np.any(values <= 0):
        return None

    return float(np.polyfit(np.log(brackets), np.log(values), 1)[0])


def _smoothed(h, y, x, scale):
    # H(x) and ∂_x H(x) − h(x) by quadrature over the samples y ≤ x
    t = (y[None, :] - x[:, None]) / scale
    below = y[None, :] <= x[:, None]
    H = trapezoid(np.where(below, plateau(t) * h[None, :], 0), y, axis=1)
    defect = -trapezoid(np.where(below, plateau(t, 1) * h[None, :], 0), y, axis=1) / scale

    return H, defect


def tarama_symbol_numeric(h, q, ell, xi_grid, far_points=1024):
    """Numerical orders of H(x, ξ; ℓ) = ∫_{y ≤ x} χ((y − x)/⟨ξ⟩_ℓ^q) h(y) dy.

    H is evaluated on the sample grid and on a far field reaching 2.5⟨ξ⟩_ℓ^q
    past it, where the cutoff acts. The defect ∂_x H − h is computed from χ′
    directly. Slopes are least-squares fits of log max_x|·| against log ⟨ξ⟩_ℓ.

    Arguments:
        h (:py:class:`SampledFunction`): Compactly supported samples.
        q (float): Cutoff scale exponent, > 1.
        ell (float): Bracket parameter, ≥ 1.
        xi_grid (iterable): Frequencies.
        far_points (int): Samples of the far field. (default: 1024)

    Returns:
        :py:class:`TaramaReport`

    Raises:
        SupportOverflow: ``h`` does not vanish at both ends of the grid.
    """
    values = np.asarray(h.values)
    edge = max(np.abs(values[0]), np.abs(values[-1]))

    if edge > SUPPORT_TOL * max(1.0, np.max(np.abs(values))):
        raise SupportOverflow(f"samples reach the window edge ({edge:.3g})")

    y = h.grid
    brackets, h_max, defect_max = [], [], []

    for xi in xi_grid:
        br = float(np.hypot(xi, ell))
        scale = br ** q
        x = np.concatenate([y, y[-1] + scale * np.linspace(0, 2.5, far_points)[1:]])
        blocks = [_smoothed(values, y, xb, scale) for xb in np.array_split(x, max(1, x.size // 512))]
        H = np.concatenate([b[0] for b in blocks])
        defect = np.concatenate([b[1] for b in blocks])
        brackets.append(br)
        h_max.append(float(np.max(np.abs(H))))
        defect_max.append(float(np.max(np.abs(defect))))
        umsg.log(f"tarama xi={xi}: max|H| {h_max[-1]:.4g}, max|defect| {defect_max[-1]:.4g}",
                 level='debug', logger=logger)

    return TaramaReport(q, ell, brackets, h_max, defect_max,
                        _slope(brackets, h_max), _slope(brackets, defect_max))
