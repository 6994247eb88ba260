"""Brute-force and Monte-Carlo reference implementations.

These deliberately re-derive every quantity from first principles instead of
calling the solver modules, so they can serve as independent cross-checks:
a dual-bisection grid search for the scalar secrecy problem, an exhaustive
rank-one beamformer sweep for small MIMO bins, and a sampling estimator for
the DFT-domain noise covariances of the circularized channel.  Only basic
linear algebra (Cholesky, FFT) is shared with the rest of the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Bin, NoiseAutocorrelation, circular_autocorrelation
from .errors import NotPositiveDefinite

_LOG2 = np.log(2.0)


@dataclass(frozen=True)
class OracleConfig:
    seed: int = 0
    samples: int = 100_000
    grid: int = 1024
    tol: float = 1e-9


def _normalized_weights(n: int, weights) -> np.ndarray:
    if weights is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (n,) or w.min() < 0 or w.sum() <= 0:
            raise ValueError("weights must be non-negative with positive sum")
        w = w / w.sum()
    return w


def scalar_grid_oracle(snr_rx, snr_eve, power, cfg: OracleConfig, weights=None) -> float:
    """Scalar secrecy capacity by dual bisection with dense per-bin grids.

    Maximizes the weighted average of (1/2) log2((1 + a c)/(1 + b c)) over
    per-bin powers c >= 0 subject to the weighted average of c equaling
    ``power``.  Each bin's Lagrangian is maximized by a dense grid over
    [0, c_max] followed by local grid refinements; c_max doubles until the
    solution is interior.  Per-bin concavity on the active set makes the
    result exact up to grid and bisection resolution.
    """
    a = np.asarray(snr_rx, dtype=float)
    b = np.asarray(snr_eve, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ValueError("SNR density lists must be equal-length 1-D and non-empty")
    if a.min() < 0 or b.min() < 0:
        raise ValueError("SNR densities must be non-negative")
    if cfg.grid < 1000:
        raise ValueError("oracle 1-D searches require grid >= 1000")
    w = _normalized_weights(a.size, weights)

    active = a > b
    if not active.any():
        return 0.0

    def objective(c):
        return 0.5 * np.log2((1.0 + a[:, None] * c) / (1.0 + b[:, None] * c))

    def best_c(mu, c_max):
        lo = np.zeros_like(a)
        hi = np.full_like(a, c_max)
        c_star = np.zeros_like(a)
        pts = cfg.grid
        for _ in range(4):
            grid = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, pts)
            val = objective(grid) - 0.5 * mu * grid
            j = np.argmax(val, axis=1)
            c_star = np.take_along_axis(grid, j[:, None], axis=1)[:, 0]
            step = (hi - lo) / (pts - 1)
            lo = np.clip(c_star - step, 0.0, None)
            hi = np.minimum(c_star + step, c_max)
            pts = 65
        c_star[~active] = 0.0
        return c_star

    c_max = max(8.0 * power, 1.0)
    for _ in range(60):
        def spent(mu):
            return float(w @ best_c(mu, c_max))

        mu_lo, mu_hi = 0.0, 1.0
        while spent(mu_hi) > power:
            mu_hi *= 2.0
        for _ in range(100):
            mid = 0.5 * (mu_lo + mu_hi)
            if spent(mid) > power:
                mu_lo = mid
            else:
                mu_hi = mid
        c = best_c(mu_hi, c_max)
        if c.max() < c_max * (1.0 - 2.0 / cfg.grid):
            break
        c_max *= 2.0

    cols = 0.5 * np.log2((1.0 + a * c) / (1.0 + b * c))
    return float(w @ cols)


def _rank_one_rate(rx_white, eve_white, rho, v) -> np.ndarray:
    """(1/2) log2 of the determinant ratio for Q = rho v v^H, whitened inputs."""
    num = 1.0 + rho * np.sum(np.abs(rx_white @ v) ** 2, axis=0)
    den = 1.0 + rho * np.sum(np.abs(eve_white @ v) ** 2, axis=0)
    return 0.5 * np.log2(num / den)


def _sphere_grid(n_tx: int, cfg: OracleConfig) -> np.ndarray:
    """Deterministic set of cfg.grid**2 unit vectors in C^{n_tx}."""
    if n_tx == 1:
        return np.ones((1, 1), dtype=complex)
    if n_tx == 2:
        theta = np.linspace(0.0, np.pi / 2, cfg.grid)
        phi = np.linspace(0.0, 2.0 * np.pi, cfg.grid, endpoint=False)
        t, p = np.meshgrid(theta, phi, indexing="ij")
        v = np.stack([np.cos(t), np.sin(t) * np.exp(1j * p)], axis=0)
        return v.reshape(2, -1)
    # Higher dimensions: seeded quasi-uniform points on the complex sphere.
    rng = np.random.default_rng(cfg.seed)
    z = rng.standard_normal((n_tx, cfg.grid ** 2)) + 1j * rng.standard_normal(
        (n_tx, cfg.grid ** 2)
    )
    return z / np.linalg.norm(z, axis=0)


def rank_one_sphere_oracle(bn: Bin, rho: float, cfg: OracleConfig) -> float:
    """Best rank-one secrecy rate of a bin over a deterministic beamformer grid.

    A lower bound on the bin's optimum; exact for scalar bins.
    """
    if bn.n_tx > 3:
        raise ValueError("sphere oracle supports at most 3 transmit antennas")
    if cfg.grid < 1000:
        raise ValueError("oracle 1-D searches require grid >= 1000")
    lw = np.linalg.cholesky(bn.rx_noise_cov)
    lu = np.linalg.cholesky(bn.eve_noise_cov)
    rx_white = np.linalg.solve(lw, bn.rx_gain)
    eve_white = np.linalg.solve(lu, bn.eve_gain)
    v = _sphere_grid(bn.n_tx, cfg)
    rates = _rank_one_rate(rx_white, eve_white, float(rho), v)
    return float(max(rates.max(), 0.0))


@dataclass(frozen=True)
class McBinCovariance:
    """Sampling estimate of a DFT-bin noise covariance with per-entry errors."""

    estimate: np.ndarray
    stderr_real: np.ndarray
    stderr_imag: np.ndarray
    samples: int

    def consistent_with(self, target: np.ndarray, sigmas: float = 5.0) -> bool:
        d_re = np.abs(self.estimate.real - np.asarray(target).real)
        d_im = np.abs(self.estimate.imag - np.asarray(target).imag)
        floor = 1e-12 * max(1.0, float(np.abs(target).max()))
        ok_re = d_re <= sigmas * self.stderr_real + floor
        ok_im = d_im <= sigmas * self.stderr_imag + floor
        return bool(ok_re.all() and ok_im.all())


def mc_noise_dft_covariance(
    acorr: NoiseAutocorrelation, n: int, k: int, cfg: OracleConfig, k2: int | None = None
) -> McBinCovariance:
    """Estimate the covariance between DFT bins k and k2 of circularized noise.

    Draws cfg.samples length-n blocks whose covariance is assembled from the
    circularized lag matrices, applies the n-point DFT, and returns the
    empirical cross-covariance E{w_hat[k] w_hat[k2]^H} together with
    elementwise standard errors of its real and imaginary parts.
    """
    if cfg.samples < 10_000:
        raise ValueError("covariance checks require samples >= 10000")
    k2 = k if k2 is None else int(k2)
    d = acorr.dim
    full = np.empty((n * d, n * d))
    lag_cache = {
        tau: circular_autocorrelation(acorr, n, tau) for tau in range(-(n - 1), n)
    }
    for i1 in range(n):
        for i2 in range(n):
            full[i1 * d : (i1 + 1) * d, i2 * d : (i2 + 1) * d] = lag_cache[i1 - i2]
    # eigendecomposition handles PSD-singular covariances (degenerate but
    # valid Gaussians); genuinely indefinite assemblies are rejected
    vals, vecs = np.linalg.eigh(0.5 * (full + full.T))
    scale = np.abs(vals).max() if vals.size else 0.0
    if vals.min() < -1e-9 * scale:
        raise NotPositiveDefinite(
            f"circularized block covariance has eigenvalue {vals.min():.3e}"
        )
    chol = vecs * np.sqrt(np.clip(vals, 0.0, None))

    rng = np.random.default_rng(cfg.seed)
    est = np.zeros((d, d), dtype=complex)
    sq_re = np.zeros((d, d))
    sq_im = np.zeros((d, d))
    done = 0
    batch = max(1, min(cfg.samples, int(4e7 // (n * d * 8)) or 1))
    while done < cfg.samples:
        s = min(batch, cfg.samples - done)
        blocks = (chol @ rng.standard_normal((n * d, s))).reshape(n, d, s)
        fhat = np.fft.fft(blocks, axis=0)
        prod = np.einsum("is,js->ijs", fhat[k], np.conj(fhat[k2]))
        est += prod.sum(axis=2)
        sq_re += (prod.real ** 2).sum(axis=2)
        sq_im += (prod.imag ** 2).sum(axis=2)
        done += s
    s_tot = float(cfg.samples)
    est /= s_tot
    var_re = np.clip(sq_re / s_tot - est.real ** 2, 0.0, None)
    var_im = np.clip(sq_im / s_tot - est.imag ** 2, 0.0, None)
    return McBinCovariance(
        estimate=est,
        stderr_real=np.sqrt(var_re / s_tot),
        stderr_imag=np.sqrt(var_im / s_tot),
        samples=cfg.samples,
    )
