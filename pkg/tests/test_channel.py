import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wiresec import (
    BlockTooShort,
    DimensionMismatch,
    MatrixTapSequence,
    MimoWiretapChannel,
    NoiseAutocorrelation,
    NotPositiveDefinite,
    build_bins,
    circular_autocorrelation,
    frequency_response,
    noise_spectral_density,
)
from wiresec.channel import block_dft, block_idft, circular_convolve
from wiresec.oracles import OracleConfig, mc_noise_dft_covariance

from conftest import random_noise_lags


class TestFrequencyResponse:
    def test_single_identity_tap(self):
        seq = MatrixTapSequence(np.eye(3)[None])
        for w in (0.0, 0.7, np.pi):
            assert np.allclose(frequency_response(seq, w), np.eye(3))

    def test_two_tap_endpoints(self):
        seq = MatrixTapSequence.from_scalar([1.0, 1.0])
        assert frequency_response(seq, 0.0)[0, 0] == pytest.approx(2.0)
        assert abs(frequency_response(seq, np.pi)[0, 0]) == pytest.approx(0.0, abs=1e-15)

    def test_alternating_taps_at_pi(self):
        seq = MatrixTapSequence.from_scalar([3.1, -3.1])
        assert frequency_response(seq, np.pi)[0, 0].real == pytest.approx(6.2)

    @settings(max_examples=25, deadline=None)
    @given(
        st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=6),
        st.floats(0, np.pi),
    )
    def test_conjugate_symmetry(self, coeffs, omega):
        seq = MatrixTapSequence.from_scalar(coeffs)
        a = frequency_response(seq, omega)
        b = frequency_response(seq, 2 * np.pi - omega)
        assert np.allclose(b, np.conj(a), atol=1e-12)

    def test_vectorized_matches_pointwise(self):
        rng = np.random.default_rng(0)
        seq = MatrixTapSequence(rng.standard_normal((3, 2, 4)))
        ws = np.linspace(0, np.pi, 7)
        batch = frequency_response(seq, ws)
        for i, w in enumerate(ws):
            assert np.allclose(batch[i], frequency_response(seq, w))


class TestNoiseSpectralDensity:
    def test_white_is_flat(self):
        acorr = NoiseAutocorrelation.white(2, variance=3.0)
        for w in (0.0, 1.0, np.pi):
            assert np.allclose(noise_spectral_density(acorr, w), 3.0 * np.eye(2))

    def test_scalar_one_lag(self):
        # degenerate at omega = pi, so skip the construction-time grid gate
        acorr = NoiseAutocorrelation.from_scalar([1.0, 0.5], validate=False)
        assert noise_spectral_density(acorr, 0.0)[0, 0].real == pytest.approx(2.0)

    def test_invalid_model_rejected_pointwise(self):
        acorr = NoiseAutocorrelation.from_scalar([1.0, 0.6], validate=False)
        with pytest.raises(NotPositiveDefinite):
            noise_spectral_density(acorr, np.pi)

    def test_invalid_model_rejected_at_construction(self):
        with pytest.raises(NotPositiveDefinite):
            NoiseAutocorrelation.from_scalar([1.0, 0.6])

    def test_asymmetric_lag0_rejected(self):
        lags = np.zeros((1, 2, 2))
        lags[0] = [[1.0, 0.5], [-0.5, 1.0]]
        with pytest.raises(NotPositiveDefinite):
            NoiseAutocorrelation(lags)


class TestCircularAutocorrelation:
    def test_no_wraparound(self):
        rng = np.random.default_rng(1)
        acorr = NoiseAutocorrelation(random_noise_lags(rng, 2, 1))
        assert np.allclose(circular_autocorrelation(acorr, 8, 0), acorr.lags[0])

    def test_negative_wrap(self):
        rng = np.random.default_rng(2)
        acorr = NoiseAutocorrelation(random_noise_lags(rng, 2, 1))
        assert np.allclose(circular_autocorrelation(acorr, 8, 7), acorr.lags[1].T)

    def test_wrap_inside_support(self):
        rng = np.random.default_rng(3)
        acorr = NoiseAutocorrelation(random_noise_lags(rng, 2, 2))
        # tau=3, n=5: only the tau - n = -2 shift lands inside the support
        assert np.allclose(circular_autocorrelation(acorr, 5, 3), acorr.lags[2].T)

    def test_block_too_short(self):
        acorr = NoiseAutocorrelation.from_scalar([1.0, 0.3])
        with pytest.raises(BlockTooShort):
            circular_autocorrelation(acorr, 2, 0)


class TestBuildBins:
    def test_memoryless_bins_identical(self):
        ch = MimoWiretapChannel.scalar([1.3], [0.5], [2.0], [1.0], 1.0)
        bins = build_bins(ch, 8)
        assert np.allclose(bins.rx_gain, 1.3)
        assert np.allclose(bins.rx_noise_cov, 8 * 2.0)
        assert np.allclose(bins.eve_noise_cov, 8 * 1.0)

    def test_even_n_midpoint_real(self, two_tap_channel):
        bins = build_bins(two_tap_channel, 8)
        for arr in (bins.rx_gain, bins.eve_gain, bins.rx_noise_cov, bins.eve_noise_cov):
            assert np.abs(arr[4].imag).max() == 0.0
            assert np.abs(arr[0].imag).max() == 0.0

    def test_two_tap_bin_value(self, two_tap_channel):
        bins = build_bins(two_tap_channel, 8)
        assert bins.rx_gain[1, 0, 0] == pytest.approx(1 + np.exp(-1j * np.pi / 4))

    def test_conjugate_symmetry_exact(self):
        rng = np.random.default_rng(4)
        ch = MimoWiretapChannel(
            rx_taps=MatrixTapSequence(rng.standard_normal((3, 2, 2))),
            eve_taps=MatrixTapSequence(rng.standard_normal((3, 1, 2))),
            rx_noise=NoiseAutocorrelation(random_noise_lags(rng, 2, 2)),
            eve_noise=NoiseAutocorrelation(random_noise_lags(rng, 1, 2)),
            power=1.0,
        )
        bins = build_bins(ch, 16)
        for k in range(1, 16):
            assert np.array_equal(bins.rx_gain[16 - k], np.conj(bins.rx_gain[k]))
            assert np.array_equal(bins.eve_noise_cov[16 - k], np.conj(bins.eve_noise_cov[k]))

    def test_noise_scaling_is_n(self, two_tap_channel):
        bins = build_bins(two_tap_channel, 10)
        spectral = two_tap_channel.rx_noise.spectral_density(bins.bin(3).omega)
        assert np.allclose(bins.rx_noise_cov[3], 10 * spectral)

    def test_block_too_short(self, two_tap_channel):
        with pytest.raises(BlockTooShort):
            build_bins(two_tap_channel, 2)

    def test_mc_noise_covariance_matches_bins(self, two_tap_channel):
        rng = np.random.default_rng(5)
        acorr = NoiseAutocorrelation(random_noise_lags(rng, 2, 1))
        ch = MimoWiretapChannel(
            rx_taps=MatrixTapSequence(np.zeros((2, 2, 1)) + rng.standard_normal((2, 2, 1))),
            eve_taps=MatrixTapSequence.from_scalar([1.0, 0.0]),
            rx_noise=acorr,
            eve_noise=NoiseAutocorrelation.from_scalar([1.0, 0.0]),
            power=1.0,
        )
        bins = build_bins(ch, 8)
        est = mc_noise_dft_covariance(acorr, 8, 2, OracleConfig(seed=9, samples=100_000))
        assert est.consistent_with(bins.rx_noise_cov[2])


class TestChannelConstruction:
    def test_dimension_checks(self):
        with pytest.raises(DimensionMismatch):
            MimoWiretapChannel(
                rx_taps=MatrixTapSequence(np.ones((1, 2, 2))),
                eve_taps=MatrixTapSequence(np.ones((1, 1, 3))),
                rx_noise=NoiseAutocorrelation.white(2),
                eve_noise=NoiseAutocorrelation.white(1),
                power=1.0,
            )

    def test_mixed_memories_zero_padded(self):
        ch = MimoWiretapChannel(
            rx_taps=MatrixTapSequence.from_scalar([1.0, 0.5, 0.25]),
            eve_taps=MatrixTapSequence.from_scalar([1.0]),
            rx_noise=NoiseAutocorrelation.white(1),
            eve_noise=NoiseAutocorrelation.from_scalar([1.0, 0.1]),
            power=1.0,
        )
        assert ch.memory == 2
        assert ch.eve_taps.memory == 2
        assert np.allclose(ch.eve_taps.taps[1:], 0.0)

    def test_immutability(self, two_tap_channel):
        with pytest.raises(ValueError):
            two_tap_channel.rx_taps.taps[0, 0, 0] = 2.0


class TestDftProperties:
    def test_round_trip(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((16, 3))
        back = block_idft(block_dft(x))
        assert np.allclose(back.real, x, rtol=1e-10, atol=1e-12)
        assert np.abs(back.imag).max() < 1e-12

    def test_parseval(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((24, 2))
        lhs = np.sum(np.abs(x) ** 2)
        rhs = np.sum(np.abs(block_dft(x)) ** 2) / 24
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_circular_convolution_diagonalizes(self):
        rng = np.random.default_rng(8)
        seq = MatrixTapSequence(rng.standard_normal((3, 2, 4)))
        x = rng.standard_normal((12, 4))
        y = circular_convolve(seq, x)
        yhat = block_dft(y)
        xhat = block_dft(x)
        gains = frequency_response(seq, 2 * np.pi * np.arange(12) / 12)
        expected = np.einsum("krc,kc->kr", gains, xhat)
        assert np.allclose(yhat, expected, rtol=1e-9, atol=1e-9)
