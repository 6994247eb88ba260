"""Narrowband power-line wiretap channels and their block-MIMO reduction.

A scalar channel with periodically time-varying taps and cyclostationary
Gaussian noise is rewritten, by stacking each block of samples into a
vector (decimated-components decomposition), as a time-invariant MIMO
wiretap channel with memory one.  Its secrecy capacity, divided by the
block length, is the secrecy capacity of the original scalar channel per
scalar channel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import MatrixTapSequence, MimoWiretapChannel, NoiseAutocorrelation, build_bins
from .errors import PeriodTooShort
from .mimo import AllocationOptions, CapacityResult, allocate_and_optimize


@dataclass(frozen=True)
class PlcChannel:
    """Scalar LPTV wiretap channel with cyclostationary Gaussian noise.

    ``rx_taps``/``eve_taps`` hold one row of taps (lags 0..tap_memory) per
    channel phase; ``rx_noise``/``eve_noise`` hold one row of autocovariances
    (lags 0..noise_memory) per noise phase, where row i gives
    E{W[i + tau] W[i]} for i in that phase.
    """

    rx_taps: np.ndarray
    eve_taps: np.ndarray
    rx_noise: np.ndarray
    eve_noise: np.ndarray
    power: float

    def __post_init__(self):
        rt = np.atleast_2d(np.asarray(self.rx_taps, dtype=float))
        et = np.atleast_2d(np.asarray(self.eve_taps, dtype=float))
        rn = np.atleast_2d(np.asarray(self.rx_noise, dtype=float))
        en = np.atleast_2d(np.asarray(self.eve_noise, dtype=float))
        if rt.shape != et.shape:
            raise PeriodTooShort(
                f"receiver and eavesdropper taps must share period and memory, "
                f"got {rt.shape} vs {et.shape}"
            )
        if rn.shape != en.shape:
            raise PeriodTooShort(
                f"receiver and eavesdropper noise tables must share period and memory, "
                f"got {rn.shape} vs {en.shape}"
            )
        if rt.shape[0] < 1 or rn.shape[0] < 1:
            raise PeriodTooShort("periods must be positive")
        if (rn[:, 0] <= 0).any() or (en[:, 0] <= 0).any():
            raise ValueError("lag-0 noise autocovariance must be positive at every phase")
        if not self.power > 0:
            raise ValueError(f"power must be positive, got {self.power}")
        for name, arr in (("rx_taps", rt), ("eve_taps", et),
                          ("rx_noise", rn), ("eve_noise", en)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def period_taps(self) -> int:
        return self.rx_taps.shape[0]

    @property
    def period_noise(self) -> int:
        return self.rx_noise.shape[0]

    @property
    def tap_memory(self) -> int:
        return self.rx_taps.shape[1] - 1

    @property
    def noise_memory(self) -> int:
        return self.rx_noise.shape[1] - 1

    @property
    def memory(self) -> int:
        return max(self.tap_memory, self.noise_memory)

    def tap(self, which: str, i: int, tau: int) -> float:
        """Tap value h[i, tau] (or g[i, tau]), zero outside 0 <= tau <= memory."""
        table = self.rx_taps if which == "rx" else self.eve_taps
        if tau < 0 or tau > self.tap_memory:
            return 0.0
        return float(table[i % self.period_taps, tau])

    def noise_acov(self, which: str, i: int, tau: int) -> float:
        """Autocovariance E{W[i+tau] W[i]}, using the phase symmetry for tau < 0."""
        table = self.rx_noise if which == "rx" else self.eve_noise
        if tau < 0:
            # E{W[i+tau] W[i]} = E{W[j - tau] W[j]} at j = i + tau
            return self.noise_acov(which, i + tau, -tau)
        if tau > self.noise_memory:
            return 0.0
        return float(table[i % self.period_noise, tau])


@dataclass(frozen=True)
class PlcBlockChannel:
    """Block-MIMO image of a PLC channel: block length and the MIMO channel."""

    block_len: int
    mimo: MimoWiretapChannel


def _block_taps(plc: PlcChannel, which: str, nt: int):
    """Banded block tap matrices for the stacked channel, memory one.

    The lag-0 matrix carries taps with 0 <= row - col <= memory and the
    lag-1 matrix carries the wrap into the previous block, rows near the top.
    """
    m = plc.memory
    b0 = np.zeros((nt, nt))
    b1 = np.zeros((nt, nt))
    for k1 in range(nt):
        for k2 in range(nt):
            if 0 <= k1 - k2 <= m:
                b0[k1, k2] = plc.tap(which, k1, k1 - k2)
            if 1 <= nt + k1 - k2 <= m:
                b1[k1, k2] = plc.tap(which, k1, nt + k1 - k2)
    return b0, b1


def _block_noise(plc: PlcChannel, which: str, nt: int):
    """Lag-0 and lag-1 autocorrelations of the stacked noise vector.

    Entry (k1, k2) of lag tau~ is E{W[(i+tau~) nt + k1] W[i nt + k2]}, which
    reduces to the cyclostationary autocovariance at phase k2 and scalar lag
    tau~ * nt + k1 - k2 because nt is a multiple of the noise period.
    """
    c0 = np.zeros((nt, nt))
    c1 = np.zeros((nt, nt))
    for k1 in range(nt):
        for k2 in range(nt):
            c0[k1, k2] = plc.noise_acov(which, k2, k1 - k2)
            c1[k1, k2] = plc.noise_acov(which, k2, nt + k1 - k2)
    return c0, c1


def build_block_channel(plc: PlcChannel, block_multiplier: int = 1) -> PlcBlockChannel:
    """Stack the scalar LPTV channel into an equivalent MIMO channel.

    The block length is the least common multiple of the tap and noise
    periods, raised to the smallest integer multiple strictly exceeding the
    scalar memory, then inflated by ``block_multiplier``.  The result is a
    block_len x block_len x block_len MIMO wiretap channel with memory one
    and per-MIMO-symbol power budget power * block_len.
    """
    if block_multiplier < 1:
        raise ValueError("block_multiplier must be a positive integer")
    base = math.lcm(plc.period_taps, plc.period_noise)
    if base <= 0:
        raise PeriodTooShort("periods must be positive")
    nt = base
    while nt <= plc.memory:
        nt += base
    nt *= int(block_multiplier)

    h0, h1 = _block_taps(plc, "rx", nt)
    g0, g1 = _block_taps(plc, "eve", nt)
    cw0, cw1 = _block_noise(plc, "rx", nt)
    cu0, cu1 = _block_noise(plc, "eve", nt)

    mimo = MimoWiretapChannel(
        rx_taps=MatrixTapSequence(np.stack([h0, h1])),
        eve_taps=MatrixTapSequence(np.stack([g0, g1])),
        rx_noise=NoiseAutocorrelation(np.stack([cw0, cw1])),
        eve_noise=NoiseAutocorrelation(np.stack([cu0, cu1])),
        power=plc.power * nt,
    )
    return PlcBlockChannel(block_len=nt, mimo=mimo)


def plc_secrecy_capacity(
    plc: PlcChannel,
    n: int,
    opts: AllocationOptions = AllocationOptions(),
    block_multiplier: int = 1,
):
    """Secrecy capacity of the PLC channel in bits per scalar channel use.

    Runs the block-MIMO solver on ``n`` DFT bins of the stacked channel and
    divides by the block length.  Returns (capacity, CapacityResult, block).
    """
    if n <= 2:
        raise ValueError("block memory is one, so n must exceed 2")
    block = build_block_channel(plc, block_multiplier=block_multiplier)
    bins = build_bins(block.mimo, n)
    result: CapacityResult = allocate_and_optimize(bins, block.mimo.power, opts)
    return result.capacity_bits / block.block_len, result, block


def simulate_lptv(plc: PlcChannel, which: str, x: np.ndarray) -> np.ndarray:
    """Noiseless scalar LPTV convolution y[i] = sum_tau h[i, tau] x[i - tau].

    Terms are accumulated in ascending input-index order so the result is
    bit-for-bit comparable with the banded block recursion.
    """
    x = np.asarray(x, dtype=float)
    y = np.zeros_like(x)
    m = plc.memory
    for i in range(x.size):
        acc = 0.0
        for tau in range(m, -1, -1):
            j = i - tau
            if j >= 0:
                acc += plc.tap(which, i, tau) * x[j]
        y[i] = acc
    return y


def simulate_block(block: PlcBlockChannel, which: str, x: np.ndarray) -> np.ndarray:
    """Noiseless block recursion Y[i] = B0 X[i] + B1 X[i-1], de-vectorized.

    Each output entry walks the two banded tap matrices in ascending column
    order, which visits the same products in the same order as the scalar
    recursion; outputs therefore match it bit-for-bit.
    """
    nt = block.block_len
    x = np.asarray(x, dtype=float)
    if x.size % nt:
        raise ValueError(f"input length must be a multiple of the block length {nt}")
    taps = block.mimo.rx_taps.taps if which == "rx" else block.mimo.eve_taps.taps
    b0, b1 = taps[0], taps[1]
    blocks = x.reshape(-1, nt)
    y = np.zeros_like(x)
    prev = np.zeros(nt)
    for bi, cur in enumerate(blocks):
        for k1 in range(nt):
            acc = 0.0
            for k2 in range(nt):
                acc += b1[k1, k2] * prev[k2]
            for k2 in range(nt):
                acc += b0[k1, k2] * cur[k2]
            y[bi * nt + k1] = acc
        prev = cur
    return y
