"""Strict-positivity test for the secrecy capacity via whitened gain ratios.

At each frequency the receiver and eavesdropper responses are whitened by
the inverse principal square roots of their noise spectral densities; the
capacity is strictly positive iff the whitened receiver gain beats the
whitened eavesdropper gain for some beamforming direction on a frequency
set of positive measure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .channel import MimoWiretapChannel, SpectralPoint
from .errors import SingularNoise

# Singular values of the whitened eavesdropper response below this fraction
# of the largest one are treated as an exact null space, which makes the
# gain ratio unbounded whenever the receiver sees that subspace.
RANK_RTOL = 1e-10

# A ratio counts as exceeding one only beyond this slack.
RATIO_TOL = 1e-9


@dataclass(frozen=True)
class PositivityReport:
    """Gain-ratio curve over a frequency grid and the resulting verdict."""

    omegas: np.ndarray
    ratios: np.ndarray
    positive_measure: float
    verdict: bool

    def __post_init__(self):
        for name in ("omegas", "ratios"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def _inv_sqrt_psd(mat: np.ndarray) -> np.ndarray:
    """Inverse of the Hermitian PSD principal square root."""
    vals, vecs = np.linalg.eigh(np.asarray(mat))
    if vals.min() <= 0:
        raise SingularNoise(
            f"noise spectral density has eigenvalue {vals.min():.3e}, cannot whiten"
        )
    return (vecs * (1.0 / np.sqrt(vals))) @ vecs.conj().T


def whiten(point: SpectralPoint):
    """Noise-normalized channel responses at one frequency.

    Returns (rx, eve) with rx = C_W'(w)^{-1/2} H'(w) and likewise for the
    eavesdropper, using Hermitian principal roots.
    """
    rx = _inv_sqrt_psd(point.rx_noise_psd) @ point.rx_gain
    eve = _inv_sqrt_psd(point.eve_noise_psd) @ point.eve_gain
    return rx, eve


def max_ratio_direction(rx_white: np.ndarray, eve_white: np.ndarray):
    """Supremum of ||rx v|| / ||eve v|| over unit v, with a maximizing v.

    The supremum is the square root of the largest generalized eigenvalue of
    the pencil (rx^H rx, eve^H eve).  When the eavesdropper response has a
    null space visible to the receiver the ratio is unbounded and +inf is
    returned with a null-space direction.
    """
    rx = np.asarray(rx_white)
    eve = np.asarray(eve_white)
    if rx.shape[1] != eve.shape[1]:
        raise ValueError("whitened responses must share the column count")
    n_tx = rx.shape[1]

    rx_norm = np.linalg.norm(rx)
    if rx_norm == 0.0:
        return 0.0, np.eye(n_tx, 1, dtype=complex)[:, 0]

    _, sig, vh = np.linalg.svd(eve, full_matrices=True)
    sig_max = sig[0] if sig.size else 0.0
    rank = int(np.sum(sig > RANK_RTOL * sig_max)) if sig_max > 0 else 0
    if rank < n_tx:
        null_basis = vh[rank:].conj().T
        gains = np.linalg.norm(rx @ null_basis, axis=0)
        j = int(np.argmax(gains))
        if gains[j] > RANK_RTOL * rx_norm:
            return np.inf, null_basis[:, j]
        # Receiver is blind to the null space; deflate onto the row space.
        basis = vh[:rank].conj().T
        if rank == 0:
            return 0.0, null_basis[:, 0]
    else:
        basis = np.eye(n_tx, dtype=complex)

    a = basis.conj().T @ (rx.conj().T @ rx) @ basis
    b = basis.conj().T @ (eve.conj().T @ eve) @ basis
    a = 0.5 * (a + a.conj().T)
    b = 0.5 * (b + b.conj().T)
    vals, vecs = scipy.linalg.eigh(a, b)
    lam = max(float(vals[-1]), 0.0)
    v = basis @ vecs[:, -1]
    v = v / np.linalg.norm(v)
    return float(np.sqrt(lam)), v


def max_gain_ratio(rx_white: np.ndarray, eve_white: np.ndarray) -> float:
    ratio, _ = max_ratio_direction(rx_white, eve_white)
    return ratio


def positivity_check(
    channel: MimoWiretapChannel,
    grid_size: int = 4096,
    measure_tol: float | None = None,
) -> PositivityReport:
    """Decide whether the secrecy capacity is strictly positive.

    Evaluates the whitened gain ratio on a uniform grid over [0, pi) and
    estimates the measure of the advantage region by counting grid points
    with ratio > 1.  The verdict requires the estimated measure to exceed
    ``measure_tol`` (default: one grid spacing, so a single isolated point
    never certifies a positive-measure set).
    """
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    spacing = np.pi / grid_size
    if measure_tol is None:
        measure_tol = spacing
    omegas = spacing * np.arange(grid_size)
    ratios = np.empty(grid_size)
    for j, w in enumerate(omegas):
        rx, eve = whiten(channel.spectral_point(w))
        ratios[j] = max_gain_ratio(rx, eve)
    measure = float(np.count_nonzero(ratios > 1.0 + RATIO_TOL) * spacing)
    return PositivityReport(
        omegas=omegas,
        ratios=ratios,
        positive_measure=measure,
        verdict=bool(measure > measure_tol),
    )
