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
from dataclasses import dataclass, field
import logging
from math import ceil, comb
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid
import umsg

from dispersym.common import (BlowupDetected, Integrator, NoPacket, StabilityViolation,
                              SupportOverflow, worker_count)
from dispersym.conditions import SampledFunction, bump, evaluate_samples



__all__ = [
    'ProbeResult',
    'SimConfig',
    'SimResult',
    'WavepacketSpec',
    'duality_probe',
    'evolve',
    'frequency_sweep',
    'multiplier_oracle',
    'packet_phase',
    'wavepacket'
]

logger = logging.getLogger(__name__)

# variable coefficients below this sup norm are treated as constant
CONSTANT_TOL = 1e-14



def multiplier_oracle(k, coeffs, xi, t):
    """Exact growth factor exp(it(ξ^k + Σ b_j ξ^j)) of the constant
    coefficient problem on the Fourier mode ξ.

    Arguments:
        k (int): Principal order.
        coeffs (dict): j to constant complex b_j.
        xi (array_like): Frequencies.
        t (float): Time.
    """
    xi = np.asarray(xi, dtype=float)
    symbol = xi ** k + sum(complex(b) * xi ** int(j) for j, b in coeffs.items())

    return np.exp(1j * t * symbol)



def _coefficient_index(name):
    if isinstance(name, str):
        return int(name.rsplit('_', 1)[-1])
    return int(name)


def _resolve(value, x):
    """Samples ``value`` on ``x``: constants, callables, sampled functions or
    arrays of matching length."""
    if isinstance(value, SampledFunction):
        value = value.values
    elif callable(value):
        value = value(x)

    out = np.asarray(value, dtype=complex)

    if out.ndim == 0:
        return np.full(x.shape, complex(out))
    if out.shape != x.shape:
        raise ValueError(f"coefficient has {out.size} samples, grid has {x.size}")

    return out



@dataclass
class SimConfig:
    """Run description for :py:func:`evolve`.

    Attributes:
        k (int): Principal order, the equation being ∂_t u = i(D^k + Σ b_j D^j)u.
        R (float): Window radius; the window is [−πR, πR).
        N (int): Number of Fourier modes, a power of two ≥ 16.
        T (float): Final time; negative values integrate backwards.
        dt (float, optional): Time step, chosen from the stability rule when
            ``None``.
        coeffs (dict): j (or ``'b_j'``) to a constant, callable, array or
            :py:class:`~dispersym.conditions.SampledFunction`.
        integrator (:py:class:`~dispersym.common.Integrator`): Time stepper.
        dealias (bool): Apply the 2/3 rule to the variable part.
        form (str): ``'plain'`` for b_j D^j, ``'weyl'`` for ½(b_j D^j + D^j b_j).
        c_stab (float): Stability constant.
        outputs (int): Number of recorded output steps.
        guard (float): Growth factor treated as blowup.
        sobolev (float, optional): Also record the H^s norm for this s.
    """
    k: int
    R: float = 8.0
    N: int = 256
    T: float = 1.0
    dt: Optional[float] = None
    coeffs: dict = field(default_factory=dict)
    integrator: Integrator = Integrator.SPLITTING
    dealias: bool = True
    form: str = 'plain'
    c_stab: float = 0.5
    outputs: int = 10
    guard: float = 1e12
    sobolev: Optional[float] = None

    def __post_init__(self):
        self.integrator = Integrator(self.integrator)

        if self.N < 16 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two ≥ 16, got {self.N}")
        if self.R <= 0:
            raise ValueError(f"window radius must be positive, got {self.R}")
        if self.form not in ('plain', 'weyl'):
            raise ValueError(f"unknown operator form: {self.form}")

    @classmethod
    def from_dict(cls, data, coeffs=None):
        """Builds a config from the ``simulate`` JSON layout. ``coeffs``
        replaces the raw ``coeffs`` entry, e.g. with parsed expressions."""
        keys = ('k', 'R', 'N', 'T', 'dt', 'integrator', 'dealias', 'form', 'c_stab',
                'outputs', 'guard', 'sobolev')
        kwargs = {x: data[x] for x in keys if x in data}

        return cls(coeffs=data.get('coeffs', {}) if coeffs is None else coeffs, **kwargs)

    @property
    def dx(self):
        return 2 * np.pi * self.R / self.N

    @property
    def grid(self):
        return -np.pi * self.R + self.dx * np.arange(self.N)

    @property
    def wavenumbers(self):
        return 2 * np.pi * np.fft.fftfreq(self.N, d=self.dx)



class SimResult(NamedTuple):
    times: np.ndarray
    norms: np.ndarray
    hs_norms: Optional[np.ndarray]
    #: |û| at every output time
    spectra: np.ndarray
    #: ‖u(T)‖ / ‖u₀‖
    growth: float
    final: np.ndarray

    def to_dict(self):
        out = {'times': self.times.tolist(), 'norms': self.norms.tolist(),
               'growth': self.growth}

        if self.hs_norms is not None:
            out['hs_norms'] = self.hs_norms.tolist()

        return out

    def to_csv(self, filename):
        cols = [self.times, self.norms]
        header = 'time,l2_norm'

        if self.hs_norms is not None:
            cols.append(self.hs_norms)
            header += ',hs_norm'

        np.savetxt(filename, np.column_stack(cols), delimiter=',', header=header, comments='')



class _Generator:
    # the exact multiplier and the variable part of i(D^k + Σ b_j D^j)
    def __init__(self, config):
        x = config.grid
        kappa = config.wavenumbers
        k = config.k
        self.kappa = kappa
        self.mask = (np.abs(np.fft.fftfreq(config.N) * config.N) < config.N / 3
                     if config.dealias else np.ones(config.N, dtype=bool))
        self.weyl = config.form == 'weyl'

        symbol = kappa.astype(complex) ** k
        self.variable = []

        for name, value in config.coeffs.items():
            j = _coefficient_index(name)

            if not 0 <= j < k:
                raise ValueError(f"coefficient index {j} outside 0..{k - 1}")

            b = _resolve(value, x)
            mean = b.mean()
            symbol = symbol + mean * kappa ** j
            rest = b - mean

            if np.max(np.abs(rest)) > CONSTANT_TOL:
                self.variable.append((j, rest))

        self.symbol = 1j * symbol
        kmax = np.max(np.abs(kappa[self.mask]))
        self.bound = max((np.max(np.abs(b)) * kmax ** j for j, b in self.variable), default=0.0)

    def apply(self, uhat):
        # V û with V = i P(Σ_j b_j D^j)P, or its Weyl symmetrization
        if not self.variable:
            return np.zeros_like(uhat)

        u = uhat * self.mask
        plain = np.fft.ifft(u)
        out = np.zeros_like(uhat)

        for j, b in self.variable:
            kj = self.kappa ** j
            term = np.fft.fft(b * np.fft.ifft(kj * u))

            if self.weyl:
                term = 0.5 * (term + kj * np.fft.fft(b * plain))

            out += term

        return 1j * out * self.mask

    def exp_apply(self, uhat, dt, tol=1e-16, max_terms=80):
        # truncated Taylor series of exp(dt V), summed to roundoff
        acc = uhat.copy()
        term = uhat
        scale = np.linalg.norm(uhat)

        for n in range(1, max_terms):
            term = self.apply(term) * (dt / n)
            acc = acc + term

            if np.linalg.norm(term) <= tol * max(scale, np.linalg.norm(acc)):
                break

        return acc


def _step_splitting(gen, uhat, half, dt):
    return half * gen.exp_apply(half * uhat, dt)


def _step_rk4(gen, uhat, half, dt):
    # integrating factor (Lawson) RK4
    full = half * half
    k1 = dt * gen.apply(uhat)
    k2 = dt * gen.apply(half * (uhat + k1 / 2))
    k3 = dt * gen.apply(half * uhat + k2 / 2)
    k4 = dt * gen.apply(full * uhat + half * k3)

    return full * uhat + (full * k1 + 2 * half * (k2 + k3) + k4) / 6


_STEPPERS = {
    Integrator.SPLITTING: _step_splitting,
    Integrator.RK4: _step_rk4
}


def stable_step(config, gen=None):
    """Largest |dt| allowed by dt · max_j max_x|b̃_j| ξ_max^j ≤ c_stab, where b̃_j
    is the variable part of b_j; ``inf`` for constant coefficients."""
    gen = _Generator(config) if gen is None else gen
    return config.c_stab / gen.bound if gen.bound else float('inf')


def evolve(config, u0):
    """Advances ∂_t u = i(D_x^k + Σ b_j(x) D_x^j)u from ``u0`` to ``config.T``.

    The principal symbol and the window means of the coefficients are applied
    exactly in Fourier space; the remaining variable part is advanced by the
    configured integrator.

    Arguments:
        config (:py:class:`SimConfig`): Run description.
        u0 (array_like): Initial samples on ``config.grid``.

    Returns:
        :py:class:`SimResult`

    Raises:
        StabilityViolation: ``config.dt`` exceeds the stability rule.
        BlowupDetected: The norm grows past ``config.guard`` or turns non-finite.
    """
    u0 = np.asarray(u0, dtype=complex)

    if u0.shape != (config.N,):
        raise ValueError(f"initial data has shape {u0.shape}, expected ({config.N},)")

    gen = _Generator(config)
    limit = stable_step(config, gen)
    span = abs(config.T)

    if config.dt is None:
        steps = max(config.outputs, ceil(span / limit) if np.isfinite(limit) else 1, 1)
    else:
        if config.dt > limit:
            raise StabilityViolation(f"dt={config.dt} exceeds stability limit {limit:.4g}")
        steps = max(1, ceil(span / config.dt - 1e-9))

    dt = config.T / steps
    half = np.exp(gen.symbol * dt / 2)
    stepper = _STEPPERS[config.integrator]
    every = max(1, steps // max(config.outputs, 1))
    weight = config.dx / config.N
    hs_weight = (1 + config.wavenumbers ** 2) ** config.sobolev if config.sobolev is not None else None

    uhat = np.fft.fft(u0)
    times, norms, hs_norms, spectra = [], [], [], []

    def _record(n, uhat):
        power = np.abs(uhat) ** 2
        times.append(n * dt)
        norms.append(np.sqrt(weight * power.sum()))
        spectra.append(np.abs(uhat))

        if hs_weight is not None:
            hs_norms.append(np.sqrt(weight * (hs_weight * power).sum()))

    _record(0, uhat)
    start = norms[0]

    umsg.log(f"evolve k={config.k}: {steps} steps of {dt:.3g} with "
             f"{config.integrator.value}, {len(gen.variable)} variable coefficients",
             level='debug', logger=logger)

    for n in range(1, steps + 1):
        uhat = stepper(gen, uhat, half, dt)

        if n % every == 0 or n == steps:
            _record(n, uhat)
            current = norms[-1]

            if not np.isfinite(current) or current > config.guard * max(start, 1e-300):
                raise BlowupDetected(f"norm {current:.3g} at t={n * dt:.4g}")

    growth = norms[-1] / start if start else float('nan')
    umsg.log(f"evolve k={config.k}: growth {growth:.6g}", level='info', logger=logger)

    return SimResult(np.array(times), np.array(norms),
                     np.array(hs_norms) if hs_weight is not None else None,
                     np.array(spectra), float(growth), np.fft.ifft(uhat))



class WavepacketSpec(NamedTuple):
    #: carrier frequency ξ₀
    xi: float
    #: center x₁
    center: float = 0.0
    #: the packet has width ξ₀^m
    m: float = 1
    #: profile supported in (−1, 1); the plateau bump by default
    profile: Optional[Callable] = None


def _default_profile(t):
    return bump(t, 0.0, 2.0)


def _envelope(spec, x):
    width = abs(spec.xi) ** spec.m

    if spec.center - width <= x[0] or spec.center + width >= x[-1]:
        raise SupportOverflow(f"packet [{spec.center - width:.4g}, {spec.center + width:.4g}] "
                              f"leaves the window [{x[0]:.4g}, {x[-1]:.4g}]")

    profile = spec.profile or _default_profile
    return np.asarray(profile((x - spec.center) / width), dtype=complex)



def wavepacket(spec, x, psi=None, normalize=False):
    """Samples e^{ixξ₀} e^{ψ(x)} f((x − x₁)/ξ₀^m) on ``x``.

    Arguments:
        spec (:py:class:`WavepacketSpec`): Packet parameters.
        x (numpy.ndarray): Uniform grid.
        psi (array_like, optional): Phase samples; zero when omitted.
        normalize (bool): Scale to unit discrete L² norm. (default: ``False``)

    Raises:
        SupportOverflow: The packet support is not inside the grid.
        NoPacket: ``normalize`` was requested for a vanishing profile.
    """
    envelope = _envelope(spec, x)

    if psi is not None:
        envelope = envelope * np.exp(np.asarray(psi, dtype=complex))

    out = np.exp(1j * spec.xi * x) * envelope

    if normalize:
        norm = np.sqrt((x[1] - x[0]) * np.sum(np.abs(out) ** 2))

        if not norm:
            raise NoPacket('cannot normalize a vanishing packet')

        out = out / norm

    return out


def _sampled(coeffs, x):
    dx = x[1] - x[0]
    return {f"b_{_coefficient_index(name)}": SampledFunction(x[0], dx, _resolve(v, x))
            for name, v in coeffs.items()}


def phase_derivative(k, m, coeffs, xi, x):
    """ψ′ = −Σ_{q=1}^m (i/(kξ^q)) P_q, with P_q the cancelled recursion cell
    of level q − 1 evaluated on the sampled coefficients."""
    from dispersym.recursion import raw_integrands

    if m < 1:
        return np.zeros(x.shape, dtype=complex)

    samples = _sampled(coeffs, x)
    zero = SampledFunction(x[0], x[1] - x[0], np.zeros(x.shape))

    for j in range(k - 1):
        samples.setdefault(f"b_{j}", zero)

    cells = raw_integrands(k)
    out = np.zeros(x.shape, dtype=complex)
    cache = {}

    for q in range(1, m + 1):
        out += (-1j / (k * xi ** q)) * evaluate_samples(cells[q - 1], samples, cache)

    return out


def packet_phase(k, m, coeffs, xi, x):
    """ψ(x) = ∫_0^x ψ′ on the grid."""
    dpsi = phase_derivative(k, m, coeffs, xi, x)
    psi = cumulative_trapezoid(dpsi, x, initial=0)

    return psi - np.interp(0.0, x, psi.real) - 1j * np.interp(0.0, x, psi.imag)



def frequency_sweep(config, xis, m=1, center=0.0, profile=None):
    """Growth factors ‖u(T)‖/‖u₀‖ of wavepacket data, one run per ξ, in
    parallel.

    Returns:
        list: ``{'xi', 'growth'}`` rows in the order of ``xis``.
    """
    x = config.grid

    def _run(xi):
        u0 = wavepacket(WavepacketSpec(xi, center, m, profile), x, normalize=True)
        result = evolve(config, u0)
        umsg.log(f"sweep xi={xi}: growth {result.growth:.6g}", level='debug', logger=logger)

        return {'xi': xi, 'growth': result.growth}

    xis = list(xis)

    with ThreadPoolExecutor(max_workers=min(worker_count(), max(len(xis), 1))) as pool:
        return list(pool.map(_run, xis))



class ProbeResult(NamedTuple):
    xi: float
    #: ‖L*v‖ / ‖v‖ at t = 0
    ratio: float
    #: predicted leading power k − 2 − m
    power: int
    residual_norm: float
    packet_norm: float

    def to_dict(self):
        return self._asdict()


def duality_probe(k, m, coeffs, xi, profile=None, R=16.0, N=4096, center=0.0,
                  use_phase=True):
    """Applies the adjoint L* = D_t − D_x^k − Σ D_x^j b̄_j to the test function
    v = e^{ixξ + itξ^k + ψ} f((x − x₁ + kξ^{k−1}t)/ξ^m) at t = 0.

    Writing v = e^{ixξ} w, the residual is computed on the smooth envelope w
    with the transport term k ξ^{k−1} D_x cancelled analytically.

    Arguments:
        k (int): Principal order.
        m (int): Packet scale exponent and phase depth.
        coeffs (dict): j (or ``'b_j'``) to coefficient values.
        xi (float): Frequency.
        profile (callable, optional): f, supported in (−1, 1).
        R (float): Window radius.
        N (int): Samples.
        center (float): x₁.
        use_phase (bool): Build ψ from the recursion. (default: ``True``)

    Returns:
        :py:class:`ProbeResult`

    Raises:
        NoPacket: The test function vanishes.
    """
    config = SimConfig(k, R=R, N=N, coeffs=coeffs)
    x = config.grid
    kappa = config.wavenumbers

    if use_phase:
        dpsi = phase_derivative(k, m, coeffs, xi, x)
        psi = packet_phase(k, m, coeffs, xi, x)
    else:
        dpsi = np.zeros(x.shape, dtype=complex)
        psi = None

    # envelope only, the carrier is factored out
    w = _envelope(WavepacketSpec(xi, center, m, profile), x)

    if psi is not None:
        w = w * np.exp(psi)

    packet_norm = np.sqrt(config.dx * np.sum(np.abs(w) ** 2))

    if not packet_norm:
        raise NoPacket('test function vanishes identically')

    what = np.fft.fft(w)
    res = np.zeros(N, dtype=complex)

    for l in range(k - 1):
        res -= comb(k, l) * xi ** l * kappa ** (k - l) * what

    residual = np.fft.ifft(res) + 1j * k * xi ** (k - 1) * dpsi * w

    for name, value in coeffs.items():
        j = _coefficient_index(name)
        bw = np.conj(_resolve(value, x)) * w
        residual -= np.fft.ifft((xi + kappa) ** j * np.fft.fft(bw))

    residual_norm = np.sqrt(config.dx * np.sum(np.abs(residual) ** 2))
    ratio = residual_norm / packet_norm

    umsg.log(f"probe k={k} m={m} xi={xi}: ratio {ratio:.6g}", level='debug', logger=logger)

    return ProbeResult(float(xi), float(ratio), k - 2 - m, float(residual_norm),
                       float(packet_norm))
