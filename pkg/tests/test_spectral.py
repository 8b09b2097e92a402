#
# NOTES:
#   Runs are kept short; the conservation run takes a few thousand split
#   steps at N=256
#
from math import comb

import numpy as np
import pytest

from dispersym.common import (BlowupDetected, Integrator, NoPacket, StabilityViolation,
                              SupportOverflow)
from dispersym.conditions import plateau
from dispersym.spectral import (SimConfig, WavepacketSpec, duality_probe, evolve,
                                frequency_sweep, multiplier_oracle, packet_phase, stable_step,
                                wavepacket)



config_error_params = [
    pytest.param({'N': 100}, id='not-power-of-two'),
    pytest.param({'N': 8}, id='too-small'),
    pytest.param({'R': 0.0}, id='radius'),
    pytest.param({'form': 'skew'}, id='form'),
    pytest.param({'integrator': 'euler'}, id='integrator'),
]
integrator_params = [
    pytest.param(Integrator.SPLITTING, id='splitting'),
    pytest.param(Integrator.RK4, id='rk4'),
]



def sine(config, amplitude):
    return lambda x: amplitude * np.sin(x / config.R)


@pytest.mark.parametrize('kwargs', config_error_params)
def test_config_errors(kwargs):
    with pytest.raises(ValueError):
        SimConfig(5, **kwargs)


def test_config_from_dict():
    config = SimConfig.from_dict({'k': 3, 'R': 2.0, 'N': 64, 'integrator': 'rk4',
                                  'coeffs': {'b_1': 0.5}})

    assert config.integrator is Integrator.RK4
    assert config.coeffs == {'b_1': 0.5}
    assert config.grid[0] == pytest.approx(-2 * np.pi)
    assert config.dx == pytest.approx(4 * np.pi / 64)


class TestConstantCoefficients:
    @classmethod
    def setup_class(cls):
        cls.config = SimConfig(5, R=1.0, N=16, T=1.0, coeffs={3: -0.1j})
        cls.u0 = np.exp(2j * cls.config.grid)
        cls.result = evolve(cls.config, cls.u0)

    def test_growth(self):
        assert self.result.growth == pytest.approx(np.exp(0.8), rel=1e-12)

    def test_oracle(self):
        expected = multiplier_oracle(5, {3: -0.1j}, 2.0, 1.0) * self.u0

        assert np.allclose(self.result.final, expected, rtol=1e-10, atol=1e-10)

    def test_oracle_modulus(self):
        assert abs(multiplier_oracle(5, {3: -0.1j}, 2.0, 1.0)) == pytest.approx(np.exp(0.8))

    def test_records(self):
        assert self.result.times[0] == 0.0
        assert self.result.times[-1] == pytest.approx(1.0)
        assert len(self.result.norms) == len(self.result.times) == self.result.spectra.shape[0]
        assert self.result.hs_norms is None

    def test_unconditional_step(self):
        assert stable_step(self.config) == float('inf')


class TestVariableCoefficients:
    def test_conservation(self):
        config = SimConfig(5, R=4.0, N=256, T=1.0, form='weyl')
        config.coeffs = {3: sine(config, 0.2)}
        u0 = np.exp(-config.grid ** 2)
        out = evolve(config, u0)

        assert np.max(np.abs(out.norms / out.norms[0] - 1)) <= 1e-6

    @pytest.mark.parametrize('integrator', integrator_params)
    def test_reversible(self, integrator):
        forward = SimConfig(5, R=4.0, N=64, T=0.25, dt=0.005, integrator=integrator)
        forward.coeffs = {3: sine(forward, 0.05)}
        backward = SimConfig(5, R=4.0, N=64, T=-0.25, dt=0.005, integrator=integrator,
                             coeffs=forward.coeffs)
        u0 = np.exp(-forward.grid ** 2 / 4)
        there = evolve(forward, u0)
        back = evolve(backward, there.final)

        tol = 1e-9 if integrator is Integrator.SPLITTING else 1e-4
        assert np.allclose(back.final, u0, atol=tol)

    def test_stability_violation(self):
        config = SimConfig(5, R=4.0, N=64, T=1.0, dt=1.0)
        config.coeffs = {3: sine(config, 0.2)}

        with pytest.raises(StabilityViolation):
            evolve(config, np.exp(-config.grid ** 2))

    def test_sobolev_norm(self):
        config = SimConfig(3, R=4.0, N=64, T=0.1, sobolev=1.0)
        out = evolve(config, np.exp(-config.grid ** 2))

        assert out.hs_norms is not None
        assert np.all(out.hs_norms >= out.norms)
        assert 'hs_norms' in out.to_dict()


def test_blowup():
    config = SimConfig(3, R=1.0, N=16, T=10.0, coeffs={1: -1j}, guard=10.0)

    with pytest.raises(BlowupDetected):
        evolve(config, np.exp(2j * config.grid))


def test_bad_initial_shape():
    with pytest.raises(ValueError):
        evolve(SimConfig(3, N=16), np.zeros(8))


def test_csv(tmp_path):
    config = SimConfig(3, R=1.0, N=16, T=0.5, outputs=4)
    out = evolve(config, np.exp(1j * config.grid))
    filename = tmp_path / 'norms.csv'
    out.to_csv(filename)
    rows = filename.read_text().splitlines()

    assert rows[0] == 'time,l2_norm'
    assert len(rows) == len(out.times) + 1


class TestWavepacket:
    @classmethod
    def setup_class(cls):
        cls.x = SimConfig(5, R=16.0, N=2048).grid

    def test_normalized(self):
        u = wavepacket(WavepacketSpec(8.0), self.x, normalize=True)
        dx = self.x[1] - self.x[0]

        assert np.sqrt(dx * np.sum(np.abs(u) ** 2)) == pytest.approx(1.0)

    def test_envelope(self):
        u = wavepacket(WavepacketSpec(8.0, center=4.0), self.x)

        assert np.allclose(np.abs(u), plateau(2 * (self.x - 4.0) / 8.0))

    def test_overflow(self):
        with pytest.raises(SupportOverflow):
            wavepacket(WavepacketSpec(64.0), self.x)

    def test_vanishing(self):
        with pytest.raises(NoPacket):
            wavepacket(WavepacketSpec(8.0, profile=lambda t: 0 * t), self.x, normalize=True)

    def test_phase_origin(self):
        psi = packet_phase(5, 1, {3: 2j}, 32.0, self.x)
        zero = np.argmin(np.abs(self.x))

        assert abs(psi[zero]) < 1e-2
        # psi' = -2 / (5 xi) for b_3 = 2i
        assert np.allclose(np.gradient(psi.real, self.x)[10:-10], -2 / (5 * 32.0), rtol=1e-6)


class TestSweep:
    @classmethod
    def setup_class(cls):
        cls.xis = [8, 16, 24, 32]
        config = SimConfig(5, R=16.0, N=2048, T=1e-3, coeffs={3: -0.05j})
        cls.rows = frequency_sweep(config, cls.xis)

    def test_order(self):
        assert [r['xi'] for r in self.rows] == self.xis

    def test_increasing(self):
        growth = [r['growth'] for r in self.rows]

        assert all(a < b for a, b in zip(growth, growth[1:]))

    def test_rate(self):
        assert self.rows[-1]['growth'] == pytest.approx(np.exp(0.05 * 32 ** 3 * 1e-3), rel=0.1)


class TestDuality:
    def test_free_operator(self):
        k, xi, R, N = 5, 32.0, 16.0, 4096
        out = duality_probe(k, 1, {}, xi, R=R, N=N)

        x = SimConfig(k, R=R, N=N).grid
        t = 2 * x / xi
        w = plateau(t)
        res = np.zeros(x.shape, dtype=complex)

        for l in range(k - 1):
            n = k - l
            res -= comb(k, l) * xi ** l * (-1j) ** n * (2 / xi) ** n * plateau(t, n)

        expected = np.linalg.norm(res) / np.linalg.norm(w)

        assert out.ratio == pytest.approx(expected, rel=1e-4)
        assert out.power == 2

    def test_phase_cancels_leading_term(self):
        coeffs = {3: 2j}
        with_phase = duality_probe(5, 1, coeffs, 32.0)
        without = duality_probe(5, 1, coeffs, 32.0, use_phase=False)

        assert with_phase.ratio < 0.5 * without.ratio

    def test_to_dict(self):
        out = duality_probe(5, 1, {}, 16.0).to_dict()

        assert set(out) == {'xi', 'ratio', 'power', 'residual_norm', 'packet_norm'}

    def test_vanishing(self):
        with pytest.raises(NoPacket):
            duality_probe(5, 1, {}, 16.0, profile=lambda t: 0 * t)
