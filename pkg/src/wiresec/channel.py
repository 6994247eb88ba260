"""Time-domain wiretap channel model and its frequency/DFT-domain transforms.

The channel is linear time-invariant with a finite number of real matrix
taps, and the additive noises are stationary real Gaussian processes with
finitely supported matrix autocorrelations.  Everything downstream (scalar
waterfilling, per-bin covariance optimization, positivity tests) consumes
either the continuous frequency response sampled on a grid or the n-point
DFT bins of the circularized block channel built here.

All types are immutable after construction and all operations are pure, so
callers may evaluate frequencies or bins in parallel without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass, field, InitVar

import numpy as np

from .errors import BlockTooShort, DimensionMismatch, NotPositiveDefinite

# Density of the frequency grid used to certify positive definiteness of a
# noise spectral density at construction time, and the relative eigenvalue
# floor.  A grid can only certify up to its own resolution; the residual
# risk between grid points is accepted.
SPECTRUM_CHECK_GRID = 4096
SPECTRUM_CHECK_RTOL = 1e-9

# Pointwise PSD tolerance used when a spectral density is evaluated at a
# single frequency.
POINT_PSD_RTOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class MatrixTapSequence:
    """Finite impulse response given as real matrix taps, lag 0 first.

    ``taps`` has shape (memory + 1, rows, cols); all taps share dimensions.
    """

    taps: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.taps, dtype=float)
        if t.ndim != 3:
            raise DimensionMismatch(
                f"taps must be a (memory+1, rows, cols) array, got shape {t.shape}"
            )
        if t.shape[0] < 1:
            raise DimensionMismatch("at least the lag-0 tap is required")
        object.__setattr__(self, "taps", _readonly(t))

    @classmethod
    def from_scalar(cls, coeffs) -> "MatrixTapSequence":
        c = np.asarray(coeffs, dtype=float).reshape(-1, 1, 1)
        return cls(c)

    @property
    def memory(self) -> int:
        return self.taps.shape[0] - 1

    @property
    def rows(self) -> int:
        return self.taps.shape[1]

    @property
    def cols(self) -> int:
        return self.taps.shape[2]

    def padded(self, memory: int) -> "MatrixTapSequence":
        """Zero-pad the tap list up to the requested memory."""
        if memory < self.memory:
            raise DimensionMismatch("cannot shrink a tap sequence")
        if memory == self.memory:
            return self
        extra = np.zeros((memory - self.memory, self.rows, self.cols))
        return MatrixTapSequence(np.concatenate([self.taps, extra], axis=0))


def frequency_response(seq: MatrixTapSequence, omega) -> np.ndarray:
    """Evaluate sum_tau taps[tau] * exp(-j*omega*tau).

    ``omega`` may be a scalar or an array; the tap axis is contracted, so a
    scalar input yields a (rows, cols) complex matrix and an array of K
    frequencies yields (K, rows, cols).
    """
    w = np.asarray(omega, dtype=float)
    tau = np.arange(seq.taps.shape[0])
    phase = np.exp(-1j * np.multiply.outer(w, tau))
    out = np.tensordot(phase, seq.taps, axes=([phase.ndim - 1], [0]))
    return out


@dataclass(frozen=True)
class NoiseAutocorrelation:
    """Matrix autocorrelation C[0..memory] of a stationary real process.

    Negative lags are implied by C[-tau] = C[tau]^T and never stored.  The
    induced spectral density sum_{|tau|<=m} C[tau] e^{-j w tau} must be
    Hermitian positive definite; this is certified numerically on a dense
    frequency grid at construction unless ``validate`` is disabled.
    """

    lags: np.ndarray
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        c = np.asarray(self.lags, dtype=float)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise DimensionMismatch(
                f"lags must be a (memory+1, dim, dim) array, got shape {c.shape}"
            )
        object.__setattr__(self, "lags", _readonly(c))
        if validate:
            c0 = c[0]
            if not np.allclose(c0, c0.T, rtol=0, atol=1e-12 * max(1.0, np.abs(c0).max())):
                raise NotPositiveDefinite("lag-0 autocorrelation must be symmetric")
            self._check_grid()

    @classmethod
    def from_scalar(cls, coeffs, validate: bool = True) -> "NoiseAutocorrelation":
        c = np.asarray(coeffs, dtype=float).reshape(-1, 1, 1)
        return cls(c, validate=validate)

    @classmethod
    def white(cls, dim: int, variance: float = 1.0) -> "NoiseAutocorrelation":
        return cls(variance * np.eye(dim)[None, :, :])

    @property
    def memory(self) -> int:
        return self.lags.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.lags.shape[1]

    def padded(self, memory: int) -> "NoiseAutocorrelation":
        if memory < self.memory:
            raise DimensionMismatch("cannot shrink an autocorrelation")
        if memory == self.memory:
            return self
        extra = np.zeros((memory - self.memory, self.dim, self.dim))
        # Zero lags do not change the spectrum, so no re-validation needed.
        return NoiseAutocorrelation(
            np.concatenate([self.lags, extra], axis=0), validate=False
        )

    def lag(self, tau: int) -> np.ndarray:
        """C[tau] for any integer lag, using C[-tau] = C[tau]^T."""
        a = abs(int(tau))
        if a > self.memory:
            return np.zeros((self.dim, self.dim))
        return self.lags[a] if tau >= 0 else self.lags[a].T

    def spectral_density(self, omega) -> np.ndarray:
        """Evaluate the Hermitian spectral density at one or many frequencies."""
        w = np.asarray(omega, dtype=float)
        taus = np.arange(1, self.memory + 1)
        out = np.broadcast_to(
            self.lags[0].astype(complex), w.shape + (self.dim, self.dim)
        ).copy()
        if taus.size:
            phase = np.exp(-1j * np.multiply.outer(w, taus))
            out += np.tensordot(phase, self.lags[1:], axes=([w.ndim], [0]))
            out += np.tensordot(
                np.conj(phase), np.transpose(self.lags[1:], (0, 2, 1)), axes=([w.ndim], [0])
            )
        # exact Hermitian part; the construction is Hermitian up to rounding
        return 0.5 * (out + np.conj(np.swapaxes(out, -1, -2)))

    def _check_grid(self):
        w = np.linspace(0.0, np.pi, SPECTRUM_CHECK_GRID)
        s = self.spectral_density(w)
        if self.dim == 1:
            vals = s[..., 0, 0].real
            lo, hi = vals.min(), vals.max()
        else:
            ev = np.linalg.eigvalsh(s)
            lo, hi = ev.min(), ev.max()
        if not (lo > SPECTRUM_CHECK_RTOL * max(hi, 0.0)):
            raise NotPositiveDefinite(
                f"noise spectral density not positive definite on the check grid "
                f"(min eigenvalue {lo:.3e}, max {hi:.3e})"
            )


def noise_spectral_density(acorr: NoiseAutocorrelation, omega: float) -> np.ndarray:
    """Spectral density at a single frequency, with a pointwise PSD check."""
    s = acorr.spectral_density(float(omega))
    ev = np.linalg.eigvalsh(s)
    scale = np.abs(ev).max() if ev.size else 0.0
    if ev.min() < -POINT_PSD_RTOL * scale:
        raise NotPositiveDefinite(
            f"spectral density at omega={float(omega):.6g} has eigenvalue {ev.min():.3e}"
        )
    return s


def circular_autocorrelation(
    acorr: NoiseAutocorrelation, n: int, tau: int
) -> np.ndarray:
    """Lag matrix of the n-circularized noise: C[tau] + C[tau+n] + C[tau-n]."""
    if n <= 2 * acorr.memory:
        raise BlockTooShort(
            f"block length {n} must exceed twice the noise memory {acorr.memory}"
        )
    if abs(tau) >= n:
        raise ValueError(f"|tau| must be below the block length, got {tau}")
    return acorr.lag(tau) + acorr.lag(tau + n) + acorr.lag(tau - n)


@dataclass(frozen=True)
class MimoWiretapChannel:
    """Finite-memory Gaussian MIMO wiretap channel under a per-symbol power cap.

    ``rx_taps``/``eve_taps`` are the transmitter-to-receiver and
    transmitter-to-eavesdropper impulse responses; ``rx_noise``/``eve_noise``
    the corresponding noise autocorrelations.  All four components are
    zero-padded to a shared memory at construction.
    """

    rx_taps: MatrixTapSequence
    eve_taps: MatrixTapSequence
    rx_noise: NoiseAutocorrelation
    eve_noise: NoiseAutocorrelation
    power: float

    def __post_init__(self):
        if self.rx_taps.cols != self.eve_taps.cols:
            raise DimensionMismatch(
                f"transmit dimensions disagree: {self.rx_taps.cols} vs {self.eve_taps.cols}"
            )
        if self.rx_taps.rows != self.rx_noise.dim:
            raise DimensionMismatch(
                f"receiver taps have {self.rx_taps.rows} rows but noise dim {self.rx_noise.dim}"
            )
        if self.eve_taps.rows != self.eve_noise.dim:
            raise DimensionMismatch(
                f"eavesdropper taps have {self.eve_taps.rows} rows but noise dim "
                f"{self.eve_noise.dim}"
            )
        if not self.power > 0:
            raise ValueError(f"power must be positive, got {self.power}")
        m = max(
            self.rx_taps.memory,
            self.eve_taps.memory,
            self.rx_noise.memory,
            self.eve_noise.memory,
        )
        object.__setattr__(self, "rx_taps", self.rx_taps.padded(m))
        object.__setattr__(self, "eve_taps", self.eve_taps.padded(m))
        object.__setattr__(self, "rx_noise", self.rx_noise.padded(m))
        object.__setattr__(self, "eve_noise", self.eve_noise.padded(m))

    @classmethod
    def scalar(cls, rx_taps, eve_taps, rx_noise, eve_noise, power) -> "MimoWiretapChannel":
        """Convenience constructor for 1x1x1 channels from coefficient lists."""
        return cls(
            MatrixTapSequence.from_scalar(rx_taps),
            MatrixTapSequence.from_scalar(eve_taps),
            NoiseAutocorrelation.from_scalar(rx_noise),
            NoiseAutocorrelation.from_scalar(eve_noise),
            float(power),
        )

    @property
    def n_tx(self) -> int:
        return self.rx_taps.cols

    @property
    def n_rx(self) -> int:
        return self.rx_taps.rows

    @property
    def n_eve(self) -> int:
        return self.eve_taps.rows

    @property
    def memory(self) -> int:
        return self.rx_taps.memory

    @property
    def is_scalar(self) -> bool:
        return self.n_tx == 1 and self.n_rx == 1 and self.n_eve == 1

    def spectral_point(self, omega: float) -> "SpectralPoint":
        return SpectralPoint(
            omega=float(omega),
            rx_gain=frequency_response(self.rx_taps, float(omega)),
            eve_gain=frequency_response(self.eve_taps, float(omega)),
            rx_noise_psd=noise_spectral_density(self.rx_noise, omega),
            eve_noise_psd=noise_spectral_density(self.eve_noise, omega),
        )


@dataclass(frozen=True)
class SpectralPoint:
    """Channel and noise matrices at a single frequency in [0, pi]."""

    omega: float
    rx_gain: np.ndarray
    eve_gain: np.ndarray
    rx_noise_psd: np.ndarray
    eve_noise_psd: np.ndarray

    def __post_init__(self):
        for name in ("rx_gain", "eve_gain", "rx_noise_psd", "eve_noise_psd"):
            object.__setattr__(self, name, _readonly(np.asarray(getattr(self, name))))


@dataclass(frozen=True)
class Bin:
    """One DFT bin of the circularized block channel.

    ``rx_noise_cov``/``eve_noise_cov`` carry the block-length factor n, i.e.
    they are n times the corresponding spectral densities at omega = 2 pi k/n.
    """

    index: int
    n: int
    rx_gain: np.ndarray
    eve_gain: np.ndarray
    rx_noise_cov: np.ndarray
    eve_noise_cov: np.ndarray

    @property
    def omega(self) -> float:
        return 2.0 * np.pi * self.index / self.n

    @property
    def is_real(self) -> bool:
        """Bins 0 and n/2 carry real-valued data and real Gaussian noise."""
        return self.index == 0 or 2 * self.index == self.n

    @property
    def n_tx(self) -> int:
        return self.rx_gain.shape[1]


@dataclass(frozen=True)
class BinSet:
    """All n DFT bins of the circularized channel, conjugate-symmetric in k."""

    n: int
    rx_gain: np.ndarray       # (n, n_rx, n_tx) complex
    eve_gain: np.ndarray      # (n, n_eve, n_tx) complex
    rx_noise_cov: np.ndarray  # (n, n_rx, n_rx) complex Hermitian, n-scaled
    eve_noise_cov: np.ndarray

    def __post_init__(self):
        for name in ("rx_gain", "eve_gain", "rx_noise_cov", "eve_noise_cov"):
            object.__setattr__(self, name, _readonly(np.asarray(getattr(self, name))))

    def bin(self, k: int) -> Bin:
        k = int(k)
        if not 0 <= k < self.n:
            raise ValueError(f"bin index {k} out of range for n={self.n}")
        return Bin(
            index=k,
            n=self.n,
            rx_gain=self.rx_gain[k],
            eve_gain=self.eve_gain[k],
            rx_noise_cov=self.rx_noise_cov[k],
            eve_noise_cov=self.eve_noise_cov[k],
        )

    def __iter__(self):
        return (self.bin(k) for k in range(self.n))


def build_bins(channel: MimoWiretapChannel, n: int) -> BinSet:
    """Sample the channel on the n-point DFT grid omega_k = 2 pi k / n.

    Bin k holds the frequency responses at omega_k together with the DFT
    noise covariances, which equal n times the noise spectral densities.
    The upper half of the bin arrays is filled by exact conjugation of the
    lower half so the conjugate-symmetry invariant holds to the last bit.
    """
    n = int(n)
    m = channel.memory
    if n <= 2 * m:
        raise BlockTooShort(f"block length {n} must exceed twice the memory {m}")
    half = n // 2
    w = 2.0 * np.pi * np.arange(half + 1) / n

    rx_gain = np.empty((n, channel.n_rx, channel.n_tx), dtype=complex)
    eve_gain = np.empty((n, channel.n_eve, channel.n_tx), dtype=complex)
    rx_cov = np.empty((n, channel.n_rx, channel.n_rx), dtype=complex)
    eve_cov = np.empty((n, channel.n_eve, channel.n_eve), dtype=complex)

    rx_gain[: half + 1] = frequency_response(channel.rx_taps, w)
    eve_gain[: half + 1] = frequency_response(channel.eve_taps, w)
    rx_cov[: half + 1] = n * channel.rx_noise.spectral_density(w)
    eve_cov[: half + 1] = n * channel.eve_noise.spectral_density(w)

    # Bins 0 and n/2 are exactly real for real channels.
    for arr in (rx_gain, eve_gain, rx_cov, eve_cov):
        arr[0] = arr[0].real
        if n % 2 == 0:
            arr[half] = arr[half].real
        arr[half + 1 :] = np.conj(arr[1 : n - half][::-1])

    for name, cov in (("receiver", rx_cov), ("eavesdropper", eve_cov)):
        ev = np.linalg.eigvalsh(cov[: half + 1])
        if ev.min() < -POINT_PSD_RTOL * np.abs(ev).max() or ev.min() <= 0:
            raise NotPositiveDefinite(
                f"{name} noise covariance is not positive definite at some bin"
            )

    return BinSet(n=n, rx_gain=rx_gain, eve_gain=eve_gain,
                  rx_noise_cov=rx_cov, eve_noise_cov=eve_cov)


def block_dft(x: np.ndarray) -> np.ndarray:
    """Forward multivariate DFT along axis 0 (negative exponent, no scaling)."""
    return np.fft.fft(np.asarray(x), axis=0)


def block_idft(xh: np.ndarray) -> np.ndarray:
    """Inverse multivariate DFT along axis 0 (1/n scaling)."""
    return np.fft.ifft(np.asarray(xh), axis=0)


def circular_convolve(seq: MatrixTapSequence, x: np.ndarray) -> np.ndarray:
    """Circular matrix convolution of a tap sequence with an (n, cols) block."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    y = np.zeros((n, seq.rows))
    for tau in range(seq.memory + 1):
        y += np.roll(x, tau, axis=0) @ seq.taps[tau].T
    return y
