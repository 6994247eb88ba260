import math

import numpy as np
import pytest

from wiresec import (
    DimensionMismatch,
    MatrixTapSequence,
    MimoWiretapChannel,
    NoiseAutocorrelation,
    OracleConfig,
    SnrDensityGrid,
    discrete_scalar_capacity,
    scalar_grid_oracle,
    snr_densities,
    waterfill,
)
from wiresec.scalar import power_spectrum

from conftest import random_scalar_channel

# Flat memoryless case with snr_rx = 1, snr_eve = 1/4 and unit power: the
# optimum spreads power uniformly, giving (1/2) log2(2 / 1.25).
FLAT_CAPACITY = 0.5 * math.log2(1.6)

# Two-tap demo channel at unit power, frozen from two independent solvers
# (closed-form waterfilling and the dual grid oracle agree to 2e-9).
TWO_TAP_CAPACITY = 0.221345406


def trapezoid_weights(n):
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


class TestSnrDensities:
    def test_identical_unit_channels(self):
        ch = MimoWiretapChannel.scalar([1.0], [1.0], [1.0], [1.0], 1.0)
        grid = snr_densities(ch, 64)
        assert np.allclose(grid.rx, 1.0)
        assert np.allclose(grid.eve, 1.0)

    def test_two_tap_at_zero(self):
        ch = MimoWiretapChannel.scalar([1.0, 1.0], [1.0], [1.0], [1.0], 1.0)
        grid = snr_densities(ch, 33)
        assert grid.rx[0] == pytest.approx(4.0)

    def test_two_tap_demo_midband(self, two_tap_channel):
        grid = snr_densities(two_tap_channel, 5)  # omega = 0, pi/4, pi/2, ...
        assert grid.rx[2] == pytest.approx(2.0)
        assert grid.eve[2] == pytest.approx(2 * 3.1 ** 2)

    def test_rejects_mimo(self):
        ch = MimoWiretapChannel(
            rx_taps=MatrixTapSequence(np.ones((1, 2, 2))),
            eve_taps=MatrixTapSequence(np.ones((1, 1, 2))),
            rx_noise=NoiseAutocorrelation.white(2),
            eve_noise=NoiseAutocorrelation.white(1),
            power=1.0,
        )
        with pytest.raises(DimensionMismatch):
            snr_densities(ch, 16)


class TestWaterfill:
    def test_identical_densities_zero(self):
        w = np.linspace(0, np.pi, 64)
        grid = SnrDensityGrid(omegas=w, rx=np.ones(64), eve=np.ones(64))
        sol = waterfill(grid, 1.0)
        assert sol.capacity_bits == 0.0
        assert np.all(sol.spectrum == 0.0)
        assert math.isnan(sol.water_level)

    def test_flat_case(self):
        w = np.linspace(0, np.pi, 512)
        grid = SnrDensityGrid(omegas=w, rx=np.ones(512), eve=np.full(512, 0.25))
        sol = waterfill(grid, 1.0)
        assert sol.capacity_bits == pytest.approx(FLAT_CAPACITY, abs=1e-9)
        assert np.allclose(sol.spectrum, 1.0, atol=1e-8)

    def test_two_tap_demo(self, two_tap_channel):
        grid = snr_densities(two_tap_channel, 2048)
        sol = waterfill(grid, 1.0)
        assert sol.capacity_bits == pytest.approx(TWO_TAP_CAPACITY, abs=2e-6)
        assert sol.power_used == pytest.approx(1.0, rel=1e-6)

    def test_zero_branch_exact(self):
        rng = np.random.default_rng(0)
        w = np.linspace(0, np.pi, 128)
        rx = rng.uniform(0, 2, 128)
        eve = rng.uniform(0, 2, 128)
        sol = waterfill(SnrDensityGrid(omegas=w, rx=rx, eve=eve), 1.0)
        assert np.all(sol.spectrum[rx <= eve] == 0.0)

    def test_power_accounting(self, two_tap_channel):
        grid = snr_densities(two_tap_channel, 512)
        for p in (0.1, 1.0, 7.5):
            sol = waterfill(grid, p)
            assert sol.power_used <= p * (1 + 1e-9)
            assert sol.power_used == pytest.approx(p, rel=1e-6)

    @pytest.mark.parametrize("seed", range(20))
    def test_monotone_in_power(self, seed):
        ch = random_scalar_channel(seed)
        grid = snr_densities(ch, 257)
        caps = [waterfill(grid, p).capacity_bits for p in (0.25, 0.5, 1.0, 2.0, 4.0)]
        for lo, hi in zip(caps, caps[1:]):
            assert hi >= lo - 1e-12

    def test_scale_invariance(self):
        beta = 2.7
        base = MimoWiretapChannel.scalar([1.0, 0.6], [0.5, 0.2], [1.0, 0.3], [1.0], 1.0)
        scaled = MimoWiretapChannel.scalar(
            [beta, 0.6 * beta], [0.5, 0.2],
            [beta ** 2, 0.3 * beta ** 2], [1.0], 1.0,
        )
        g0 = snr_densities(base, 257)
        g1 = snr_densities(scaled, 257)
        assert np.allclose(g0.rx, g1.rx, rtol=1e-10)
        s0, s1 = waterfill(g0, 1.0), waterfill(g1, 1.0)
        assert s0.capacity_bits == pytest.approx(s1.capacity_bits, rel=1e-10)
        assert np.allclose(s0.spectrum, s1.spectrum, rtol=1e-8, atol=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_oracle_equivalence(self, seed):
        ch = random_scalar_channel(seed + 100)
        grid = snr_densities(ch, 257)
        direct = waterfill(grid, ch.power).capacity_bits
        ref = scalar_grid_oracle(
            grid.rx, grid.eve, ch.power, OracleConfig(seed=seed, grid=1024),
            weights=trapezoid_weights(257),
        )
        assert direct == pytest.approx(ref, abs=1e-4)

    def test_dual_feasibility(self, two_tap_channel):
        grid = snr_densities(two_tap_channel, 257)
        sol = waterfill(grid, 1.0)
        mu = sol.water_level
        cgrid = np.linspace(0, sol.spectrum.max() * 3 + 1.0, 20001)
        for j in range(0, 257, 16):
            a, b = grid.rx[j], grid.eve[j]
            lagr = 0.5 * np.log((1 + a * cgrid) / (1 + b * cgrid)) - 0.5 * mu * cgrid
            best = cgrid[np.argmax(lagr)]
            assert sol.spectrum[j] == pytest.approx(best, abs=cgrid[1] + 1e-9)

    def test_vanishing_eavesdropper_limit(self):
        # closed form must approach the (1/mu - 1/a)+ limit as snr_eve -> 0
        a = np.array([2.0, 1.0, 0.5])
        mu = 0.3
        exact = power_spectrum(mu, a, np.zeros(3))
        near = power_spectrum(mu, a, np.full(3, 1e-10))
        assert np.allclose(exact, near, rtol=1e-4, atol=1e-6)
        assert np.allclose(exact, np.clip(1 / mu - 1 / a, 0, None))

    def test_eavesdropper_null_against_oracle(self):
        w = np.linspace(0, np.pi, 257)
        rx = 1.5 + np.cos(w)
        eve = np.zeros(257)
        sol = waterfill(SnrDensityGrid(omegas=w, rx=rx, eve=eve), 1.0)
        ref = scalar_grid_oracle(
            rx, np.full(257, 1e-8), 1.0, OracleConfig(seed=0, grid=1024),
            weights=trapezoid_weights(257),
        )
        assert sol.capacity_bits == pytest.approx(ref, abs=1e-4)


class TestDiscreteScalarCapacity:
    def test_identical_channels_zero(self, identical_channel):
        for n in (8, 32, 111):
            cap, c, mu = discrete_scalar_capacity(identical_channel, n)
            assert cap == 0.0
            assert np.all(c == 0.0)

    def test_flat_case_any_n(self):
        ch = MimoWiretapChannel.scalar([1.0], [0.5], [1.0], [1.0], 1.0)
        for n in (4, 9, 64):
            cap, c, mu = discrete_scalar_capacity(ch, n)
            assert cap == pytest.approx(FLAT_CAPACITY, abs=1e-9)
            assert np.allclose(c, n * 1.0, rtol=1e-8)

    def test_converges_to_waterfill(self, two_tap_channel):
        wf = waterfill(snr_densities(two_tap_channel, 2048), 1.0).capacity_bits
        cap1024, _, _ = discrete_scalar_capacity(two_tap_channel, 1024)
        assert abs(cap1024 - wf) < 1e-3

    def test_differences_shrink(self, two_tap_channel):
        caps = {n: discrete_scalar_capacity(two_tap_channel, n)[0] for n in (64, 128, 256)}
        d1 = abs(caps[128] - caps[64])
        d2 = abs(caps[256] - caps[128])
        assert d2 < d1

    def test_allocation_symmetric(self, two_tap_channel):
        _, c, _ = discrete_scalar_capacity(two_tap_channel, 16)
        for k in range(1, 16):
            assert c[k] == c[16 - k]
