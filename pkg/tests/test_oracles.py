import math

import numpy as np
import pytest

from wiresec import (
    MimoWiretapChannel,
    NoiseAutocorrelation,
    NotPositiveDefinite,
    OracleConfig,
    build_bins,
    mc_noise_dft_covariance,
    rank_one_sphere_oracle,
    scalar_grid_oracle,
)

from conftest import random_noise_lags

CFG = OracleConfig(seed=0, samples=100_000, grid=1024)


class TestScalarGridOracle:
    def test_identical_densities(self):
        a = np.linspace(0.1, 2.0, 32)
        assert scalar_grid_oracle(a, a, 1.0, CFG) == 0.0

    def test_flat_value(self):
        got = scalar_grid_oracle(np.ones(128), np.full(128, 0.25), 1.0, CFG)
        assert got == pytest.approx(0.5 * math.log2(1.6), abs=1e-4)

    def test_two_tap_demo_value(self, two_tap_channel):
        # pinned from two independent solvers; see test_scalar.TWO_TAP_CAPACITY
        from wiresec import snr_densities

        grid = snr_densities(two_tap_channel, 1025)
        w = np.ones(1025)
        w[0] = w[-1] = 0.5
        got = scalar_grid_oracle(grid.rx, grid.eve, 1.0, CFG, weights=w)
        assert got == pytest.approx(0.221345406, abs=1e-4)

    def test_monotone_in_power(self):
        rng = np.random.default_rng(3)
        a = rng.uniform(0, 4, 64)
        b = rng.uniform(0, 4, 64)
        caps = [scalar_grid_oracle(a, b, p, CFG) for p in (0.5, 1.0, 2.0, 4.0)]
        assert all(hi >= lo for lo, hi in zip(caps, caps[1:]))

    def test_permutation_invariance_uniform_weights(self):
        rng = np.random.default_rng(4)
        a = rng.uniform(0, 3, 50)
        b = rng.uniform(0, 3, 50)
        perm = rng.permutation(50)
        c0 = scalar_grid_oracle(a, b, 1.3, CFG)
        c1 = scalar_grid_oracle(a[perm], b[perm], 1.3, CFG)
        assert c0 == pytest.approx(c1, abs=1e-9)

    def test_discrete_bin_convention(self):
        # uniform weights with mean target n*P reproduce the circular
        # discretization; flat channels give the closed-form value
        n = 16
        a = np.full(n, 1.0 / n)
        b = np.full(n, 0.25 / n)
        got = scalar_grid_oracle(a, b, n * 1.0, CFG)
        assert got == pytest.approx(0.5 * math.log2(1.6), abs=1e-4)


class TestRankOneSphereOracle:
    def test_scalar_full_power(self):
        ch = MimoWiretapChannel.scalar([1.2], [0.4], [1.0], [1.0], 1.0)
        bn = build_bins(ch, 4).bin(1)
        rho = 2.0
        a_r = abs(bn.rx_gain[0, 0]) ** 2 / bn.rx_noise_cov[0, 0].real
        a_e = abs(bn.eve_gain[0, 0]) ** 2 / bn.eve_noise_cov[0, 0].real
        expect = 0.5 * math.log2((1 + a_r * rho) / (1 + a_e * rho))
        assert rank_one_sphere_oracle(bn, rho, CFG) == pytest.approx(expect, abs=1e-12)

    def test_identical_clamped_to_zero(self):
        ch = MimoWiretapChannel.scalar([1.0, 0.2], [1.0, 0.2], [1.0], [1.0], 1.0)
        bn = build_bins(ch, 8).bin(1)
        assert rank_one_sphere_oracle(bn, 5.0, CFG) == 0.0

    def test_null_space_beamforming(self):
        from wiresec.channel import Bin

        h = np.array([[1.6, 0.3], [0.2, 0.9]], dtype=complex)
        _, sig, vh = np.linalg.svd(h)
        blind = vh.conj().T[:, 1]
        bn = Bin(
            index=1, n=8,
            rx_gain=h,
            eve_gain=(3.0 * blind)[None, :].conj(),
            rx_noise_cov=np.eye(2, dtype=complex),
            eve_noise_cov=np.eye(1, dtype=complex),
        )
        rho = 2.5
        expect = 0.5 * math.log2(1 + rho * sig[0] ** 2)
        assert rank_one_sphere_oracle(bn, rho, CFG) == pytest.approx(expect, abs=1e-3)


class TestMcNoiseDftCovariance:
    def test_white_noise(self):
        est = mc_noise_dft_covariance(NoiseAutocorrelation.white(1, 2.0), 8, 1, CFG)
        assert est.consistent_with(np.array([[8 * 2.0]]))

    def test_one_lag_dc_bin(self):
        acorr = NoiseAutocorrelation.from_scalar([1.0, 0.5], validate=False)
        est = mc_noise_dft_covariance(acorr, 8, 0, CFG)
        # spectral density 2.0 at omega = 0, scaled by n = 8
        assert est.consistent_with(np.array([[16.0]]))
        assert abs(est.estimate[0, 0].real - 16.0) < 0.5

    def test_matrix_model_matches_formula(self):
        rng = np.random.default_rng(5)
        acorr = NoiseAutocorrelation(random_noise_lags(rng, 2, 1))
        n, k = 12, 3
        target = n * acorr.spectral_density(2 * np.pi * k / n)
        est = mc_noise_dft_covariance(acorr, n, k, CFG)
        assert est.consistent_with(target)

    def test_cross_bin_independence(self):
        acorr = NoiseAutocorrelation.from_scalar([1.0, 0.3])
        est = mc_noise_dft_covariance(acorr, 8, 1, CFG, k2=2)
        assert est.consistent_with(np.zeros((1, 1)))

    def test_invalid_model_rejected(self):
        bad = NoiseAutocorrelation.from_scalar([1.0, 0.6], validate=False)
        with pytest.raises(NotPositiveDefinite):
            mc_noise_dft_covariance(bad, 8, 0, CFG)

    def test_seed_reproducibility(self):
        acorr = NoiseAutocorrelation.from_scalar([1.0, 0.3])
        cfg = OracleConfig(seed=42, samples=20_000)
        a = mc_noise_dft_covariance(acorr, 8, 2, cfg)
        b = mc_noise_dft_covariance(acorr, 8, 2, cfg)
        assert np.array_equal(a.estimate, b.estimate)

    def test_sample_floor_enforced(self):
        with pytest.raises(ValueError):
            mc_noise_dft_covariance(
                NoiseAutocorrelation.white(1), 8, 0, OracleConfig(samples=100)
            )
