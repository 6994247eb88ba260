import numpy as np
import pytest

from wiresec import MatrixTapSequence, MimoWiretapChannel, NoiseAutocorrelation

DATA_DIR_NAME = "data"


@pytest.fixture
def two_tap_channel():
    """Scalar two-tap demo channel: strong eavesdropper, unit white noises."""
    return MimoWiretapChannel.scalar([1.0, 1.0], [3.1, -3.1], [1.0], [1.0], 1.0)


@pytest.fixture
def identical_channel():
    """Same response and noise to receiver and eavesdropper: zero capacity."""
    return MimoWiretapChannel.scalar([1.0, 0.4], [1.0, 0.4], [1.0, 0.2], [1.0, 0.2], 1.0)


def random_noise_lags(rng, dim, memory, floor=0.05):
    """Valid autocorrelation via a matrix moving-average factorization.

    C[tau] = sum_i B[i + tau] B[i]^T is the autocorrelation of a process
    filtered by the B taps, so its spectral density is PSD by construction;
    a white floor at lag zero keeps it strictly positive definite.
    """
    b = rng.standard_normal((memory + 1, dim, dim))
    lags = np.zeros((memory + 1, dim, dim))
    for tau in range(memory + 1):
        for i in range(memory + 1 - tau):
            lags[tau] += b[i + tau] @ b[i].T
    lags[0] = 0.5 * (lags[0] + lags[0].T) + floor * np.trace(lags[0]) * np.eye(dim)
    return lags


def random_scalar_channel(seed, max_memory=4):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(0, max_memory + 1))
    mn = int(rng.integers(0, max_memory + 1))
    return MimoWiretapChannel(
        rx_taps=MatrixTapSequence.from_scalar(rng.standard_normal(m + 1)),
        eve_taps=MatrixTapSequence.from_scalar(rng.standard_normal(m + 1)),
        rx_noise=NoiseAutocorrelation(random_noise_lags(rng, 1, mn)),
        eve_noise=NoiseAutocorrelation(random_noise_lags(rng, 1, mn)),
        power=float(rng.uniform(0.5, 2.0)),
    )


def random_mimo_channel(seed, n_tx=2, n_rx=2, n_eve=1, memory=1):
    rng = np.random.default_rng(seed)
    return MimoWiretapChannel(
        rx_taps=MatrixTapSequence(rng.standard_normal((memory + 1, n_rx, n_tx))),
        eve_taps=MatrixTapSequence(rng.standard_normal((memory + 1, n_eve, n_tx))),
        rx_noise=NoiseAutocorrelation(random_noise_lags(rng, n_rx, memory)),
        eve_noise=NoiseAutocorrelation(random_noise_lags(rng, n_eve, memory)),
        power=1.0,
    )
