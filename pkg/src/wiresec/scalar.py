"""Closed-form secrecy capacity of scalar finite-memory Gaussian wiretap channels.

The frequency-domain solution allocates transmit power only where the
receiver's SNR density exceeds the eavesdropper's, with a per-frequency
closed form parameterized by a single water-level multiplier.  The same
machinery solves both the continuous problem (trapezoidal quadrature on a
uniform grid over [0, pi]) and its n-point circular discretization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import MimoWiretapChannel, build_bins, frequency_response
from .errors import DimensionMismatch

# Bisection bracket floor for the water-level multiplier; extended downward
# automatically if an enormous power budget requires it.
_MU_FLOOR = 1e-12


@dataclass(frozen=True)
class SnrDensityGrid:
    """Receiver and eavesdropper SNR densities sampled on an ascending grid."""

    omegas: np.ndarray
    rx: np.ndarray
    eve: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.omegas, dtype=float)
        a = np.asarray(self.rx, dtype=float)
        b = np.asarray(self.eve, dtype=float)
        if not (w.shape == a.shape == b.shape) or w.ndim != 1:
            raise ValueError("grid arrays must be 1-D with equal lengths")
        if a.min() < 0 or b.min() < 0:
            raise ValueError("SNR densities must be non-negative")
        for name, arr in (("omegas", w), ("rx", a), ("eve", b)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class WaterfillingSolution:
    """Optimal scalar power spectrum, its water level, and the capacity.

    ``water_level`` is NaN when the receiver nowhere out-SNRs the
    eavesdropper, in which case the spectrum is identically zero.
    """

    water_level: float
    spectrum: np.ndarray
    capacity_bits: float
    power_used: float

    def __post_init__(self):
        s = np.asarray(self.spectrum, dtype=float).copy()
        s.flags.writeable = False
        object.__setattr__(self, "spectrum", s)


def snr_densities(channel: MimoWiretapChannel, n_grid: int = 2048) -> SnrDensityGrid:
    """Sample |h'(w)|^2 / c_W'(w) and |g'(w)|^2 / c_U'(w) on [0, pi]."""
    if not channel.is_scalar:
        raise DimensionMismatch(
            f"scalar solver requires a 1x1x1 channel, got "
            f"{channel.n_tx}x{channel.n_rx}x{channel.n_eve}"
        )
    if n_grid < 2:
        raise ValueError("n_grid must be at least 2")
    w = np.linspace(0.0, np.pi, int(n_grid))
    hr = frequency_response(channel.rx_taps, w)[:, 0, 0]
    he = frequency_response(channel.eve_taps, w)[:, 0, 0]
    cw = channel.rx_noise.spectral_density(w)[:, 0, 0].real
    cu = channel.eve_noise.spectral_density(w)[:, 0, 0].real
    return SnrDensityGrid(omegas=w, rx=np.abs(hr) ** 2 / cw, eve=np.abs(he) ** 2 / cu)


def power_spectrum(mu: float, snr_rx, snr_eve) -> np.ndarray:
    """Per-frequency optimal power for a given water-level multiplier.

    Zero wherever snr_rx <= snr_eve; otherwise the positive root of the
    per-frequency stationarity condition.  Frequencies where the
    eavesdropper density vanishes use the analytic limit (1/mu - 1/snr_rx)+,
    which the closed form approaches as snr_eve -> 0.
    """
    a = np.asarray(snr_rx, dtype=float)
    b = np.asarray(snr_eve, dtype=float)
    c = np.zeros_like(a)
    both = (a > b) & (b > 0)
    if both.any():
        aa, bb = a[both], b[both]
        gap = (aa - bb) / (2.0 * aa * bb)
        c[both] = np.sqrt(gap ** 2 + 2.0 * gap / mu) - (aa + bb) / (2.0 * aa * bb)
    limit = (a > b) & (b == 0)
    if limit.any():
        c[limit] = 1.0 / mu - 1.0 / a[limit]
    return np.clip(c, 0.0, None)


def _rate_terms(c, snr_rx, snr_eve) -> np.ndarray:
    return 0.5 * np.log2((1.0 + snr_rx * c) / (1.0 + snr_eve * c))


def _solve_water_level(snr_rx, snr_eve, weights, target_mean_power, tol):
    """Bisection on mu so the weighted mean of the spectrum hits the target."""

    def mean_power(mu):
        return float(weights @ power_spectrum(mu, snr_rx, snr_eve))

    lo = _MU_FLOOR
    guard = 0
    while mean_power(lo) < target_mean_power:
        lo *= 1e-3
        guard += 1
        if guard > 20:
            break
    hi = max(2.0 * lo, 1.0)
    while mean_power(hi) > target_mean_power:
        hi *= 2.0
    while (hi - lo) > tol * hi:
        mid = 0.5 * (lo + hi)
        if mean_power(mid) > target_mean_power:
            lo = mid
        else:
            hi = mid
    # feasible side of the bracket
    return hi


def waterfill(grid: SnrDensityGrid, power: float, tol: float = 1e-10) -> WaterfillingSolution:
    """Secrecy-optimal power allocation over a frequency grid.

    The water level is found by bisection so the trapezoidal estimate of the
    mean allocated power equals ``power`` within ``tol``; the capacity is the
    trapezoidal estimate of the average per-frequency rate, in bits per
    channel use.  Returns the all-zero solution when no frequency offers the
    receiver an SNR advantage.
    """
    if not power > 0:
        raise ValueError(f"power must be positive, got {power}")
    a, b, w = grid.rx, grid.eve, grid.omegas
    weights = np.ones_like(w)
    weights[0] = weights[-1] = 0.5
    weights /= weights.sum()

    if not (a > b).any():
        return WaterfillingSolution(
            water_level=math.nan,
            spectrum=np.zeros_like(a),
            capacity_bits=0.0,
            power_used=0.0,
        )

    mu = _solve_water_level(a, b, weights, power, tol)
    c = power_spectrum(mu, a, b)
    capacity = float(weights @ _rate_terms(c, a, b))
    return WaterfillingSolution(
        water_level=mu,
        spectrum=c,
        capacity_bits=capacity,
        power_used=float(weights @ c),
    )


def discrete_scalar_capacity(
    channel: MimoWiretapChannel, n: int, tol: float = 1e-10
):
    """Secrecy capacity of the n-point circular discretization of a scalar channel.

    Uses the DFT-bin SNR densities (which carry a 1/n factor from the bin
    noise covariances), allocates bin powers summing to n^2 * P with the
    same closed form, and returns (capacity_bits, per-bin powers, mu).
    Conjugate symmetry of the allocation is enforced by mirroring.
    """
    if not channel.is_scalar:
        raise DimensionMismatch(
            f"scalar solver requires a 1x1x1 channel, got "
            f"{channel.n_tx}x{channel.n_rx}x{channel.n_eve}"
        )
    bins = build_bins(channel, n)
    a = (np.abs(bins.rx_gain[:, 0, 0]) ** 2 / bins.rx_noise_cov[:, 0, 0].real)
    b = (np.abs(bins.eve_gain[:, 0, 0]) ** 2 / bins.eve_noise_cov[:, 0, 0].real)

    weights = np.full(n, 1.0 / n)
    if not (a > b).any():
        return 0.0, np.zeros(n), math.nan

    # mean-power target n*P makes the bin powers sum to n^2 * P
    mu = _solve_water_level(a, b, weights, n * channel.power, tol)
    c = power_spectrum(mu, a, b)
    half = n // 2
    c[half + 1 :] = c[1 : n - half][::-1]
    capacity = float(np.sum(_rate_terms(c, a, b)) / n)
    return capacity, c, mu
