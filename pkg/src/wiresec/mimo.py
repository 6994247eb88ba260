"""Secrecy capacity of the finite-n circularized MIMO wiretap channel.

Each DFT bin is an independent memoryless MIMO wiretap channel whose
secrecy rate for a given input covariance is a log-determinant ratio.  The
per-bin rate is maximized over the PSD cone with a trace budget by projected
gradient ascent with multiple restarts (the problem is non-convex for more
than one transmit antenna), and the cross-bin power split is found by
bisection on a Lagrange multiplier over cached per-bin rate tables.  The
reported dual bound certifies the cross-bin allocation against the cached
tables; per-bin values remain lower bounds, so the capacity is reported as
a lower bound with an honest gap, never as exact.
"""

from __future__ import annotations

import bisect as _bisect
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import Bin, BinSet, MimoWiretapChannel, build_bins
from .errors import SingularNoise
from .positivity import max_ratio_direction

_LOG2 = np.log(2.0)

# Bins whose whitened gain ratio does not exceed one by this margin provably
# admit no positive secrecy rate and are skipped.
_ACTIVE_RTOL = 1e-12


@dataclass(frozen=True)
class PsdCovariance:
    """Hermitian PSD input covariance with a trace budget."""

    matrix: np.ndarray
    trace_budget: float

    def __post_init__(self):
        q = np.asarray(self.matrix)
        scale = max(1.0, float(np.abs(q).max()) if q.size else 0.0)
        if not np.allclose(q, q.conj().T, rtol=0, atol=1e-12 * scale):
            raise ValueError("covariance must be Hermitian")
        tr = float(np.trace(q).real)
        ev_min = float(np.linalg.eigvalsh(0.5 * (q + q.conj().T)).min())
        if ev_min < -1e-9 * max(tr, 1e-300):
            raise ValueError(f"covariance has eigenvalue {ev_min:.3e} below the PSD floor")
        if tr > self.trace_budget * (1.0 + 1e-9) + 1e-300:
            raise ValueError(
                f"trace {tr:.6g} exceeds the budget {self.trace_budget:.6g}"
            )
        q = q.copy()
        q.flags.writeable = False
        object.__setattr__(self, "matrix", q)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True)
class CovarianceAllocation:
    """Per-bin input covariances with conjugate symmetry and a sum budget."""

    n: int
    mats: tuple
    total_budget: float

    def __post_init__(self):
        if len(self.mats) != self.n:
            raise ValueError("one covariance per bin is required")
        half = self.n // 2
        for k in range(half + 1, self.n):
            if not np.array_equal(self.mats[k].matrix, np.conj(self.mats[self.n - k].matrix)):
                raise ValueError(f"bin {k} must be the conjugate of bin {self.n - k}")
        for k in {0, half} if self.n % 2 == 0 else {0}:
            q = self.mats[k].matrix
            if np.abs(q.imag).max() > 1e-12 * max(1.0, np.abs(q).max()):
                raise ValueError(f"bin {k} covariance must be real symmetric")
        total = sum(m.trace for m in self.mats)
        if total > self.total_budget * (1.0 + 1e-9) + 1e-300:
            raise ValueError(
                f"allocated power {total:.6g} exceeds the block budget {self.total_budget:.6g}"
            )
        object.__setattr__(self, "mats", tuple(self.mats))

    @property
    def total_power(self) -> float:
        return sum(m.trace for m in self.mats)


@dataclass(frozen=True)
class CapacityResult:
    """Lower-bound capacity, the achieving allocation, and an allocation dual bound."""

    capacity_bits: float
    allocation: CovarianceAllocation
    dual_bound_bits: float
    per_bin_rates: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.capacity_bits > self.dual_bound_bits + 1e-9:
            raise ValueError(
                f"capacity {self.capacity_bits} exceeds the dual bound {self.dual_bound_bits}"
            )
        r = np.asarray(self.per_bin_rates, dtype=float).copy()
        r.flags.writeable = False
        object.__setattr__(self, "per_bin_rates", r)


def _as_matrix(q) -> np.ndarray:
    return q.matrix if isinstance(q, PsdCovariance) else np.asarray(q)


def _whiten_bin(bn: Bin):
    """Noise-whitened responses (L^-1 H, L^-1 G) via Cholesky factors."""
    try:
        lw = np.linalg.cholesky(bn.rx_noise_cov)
        lu = np.linalg.cholesky(bn.eve_noise_cov)
    except np.linalg.LinAlgError as exc:
        raise SingularNoise(f"bin {bn.index} noise covariance is not positive definite") from exc
    return np.linalg.solve(lw, bn.rx_gain), np.linalg.solve(lu, bn.eve_gain)


_EYE_CACHE: dict = {}


def _eye(d: int) -> np.ndarray:
    if d not in _EYE_CACHE:
        eye = np.eye(d)
        eye.flags.writeable = False
        _EYE_CACHE[d] = eye
    return _EYE_CACHE[d]


def _logdet_eye_plus(a: np.ndarray, q: np.ndarray) -> float:
    m = _eye(a.shape[0]) + a @ q @ a.conj().T
    m = 0.5 * (m + m.conj().T)
    chol = np.linalg.cholesky(m)
    return 2.0 * float(np.sum(np.log(np.diag(chol).real)))


def _rate_white(rx_w, eve_w, q) -> float:
    return (_logdet_eye_plus(rx_w, q) - _logdet_eye_plus(eve_w, q)) / (2.0 * _LOG2)


def _grad_term(a: np.ndarray, q: np.ndarray) -> np.ndarray:
    m = _eye(a.shape[0]) + a @ q @ a.conj().T
    m = 0.5 * (m + m.conj().T)
    return a.conj().T @ np.linalg.solve(m, a)


def _grad_white(rx_w, eve_w, q) -> np.ndarray:
    g = (_grad_term(rx_w, q) - _grad_term(eve_w, q)) / (2.0 * _LOG2)
    return 0.5 * (g + g.conj().T)


def per_bin_rate(bn: Bin, q) -> float:
    """Secrecy rate of one bin for input covariance q, in bits; may be negative."""
    rx_w, eve_w = _whiten_bin(bn)
    return _rate_white(rx_w, eve_w, _as_matrix(q))


def per_bin_rate_gradient(bn: Bin, q) -> np.ndarray:
    """Gradient of per_bin_rate with respect to a Hermitian perturbation of q.

    The directional derivative along a Hermitian direction E equals
    Re trace(gradient @ E).
    """
    rx_w, eve_w = _whiten_bin(bn)
    g = _grad_white(rx_w, eve_w, _as_matrix(q))
    return g.real if bn.is_real else g


def project_psd_trace(mat: np.ndarray, budget: float, real: bool = False) -> np.ndarray:
    """Closest (Frobenius) PSD matrix with trace at most ``budget``.

    Eigenvalues are clipped at zero; if their sum still exceeds the budget
    they are shifted down uniformly (water-shift) and re-clipped, which is
    the exact Euclidean projection of the spectrum onto the capped simplex.
    """
    m = np.asarray(mat)
    m = 0.5 * (m + m.conj().T)
    if real:
        m = m.real
    vals, vecs = np.linalg.eigh(m)
    clipped = np.clip(vals, 0.0, None)
    total = clipped.sum()
    if total > budget:
        u = np.sort(vals)[::-1]
        csum = np.cumsum(u)
        j = np.arange(1, len(u) + 1)
        theta_candidates = (csum - budget) / j
        valid = u - theta_candidates > 0
        rho = int(np.nonzero(valid)[0][-1])
        theta = theta_candidates[rho]
        clipped = np.clip(vals - theta, 0.0, None)
    out = (vecs * clipped) @ vecs.conj().T
    out = 0.5 * (out + out.conj().T)
    return out.real if real else out


@dataclass(frozen=True)
class BinOptimizerOptions:
    restarts: int = 8
    seed: int = 0
    tol: float = 1e-8
    max_iter: int = 2000


def _ascend(rx_w, eve_w, q0, budget, real, tol, max_iter, value_rtol=1e-15):
    """Projected gradient ascent with Armijo backtracking from one start.

    Trial steps use the Barzilai-Borwein spectral length when the previous
    iterate makes it well defined, which keeps the iteration count low on
    ill-conditioned bins; backtracking guarantees monotone ascent.
    """

    def project(m):
        return project_psd_trace(m, budget, real=real)

    q = project(q0)
    value = _rate_white(rx_w, eve_w, q)
    step = 1.0
    stop = tol * max(1.0, budget)
    stall = 0
    prev_q = None
    prev_grad = None
    for _ in range(max_iter):
        grad = _grad_white(rx_w, eve_w, q)
        if real:
            grad = grad.real
        if prev_q is not None:
            s = q - prev_q
            y = prev_grad - grad
            sy = float(np.sum(np.conj(s) * y).real)
            ss = float(np.sum(np.conj(s) * s).real)
            if sy > 1e-300 and np.isfinite(ss / sy):
                step = min(max(ss / sy, 1e-12), 1e12)
        prev_q, prev_grad = q, grad
        moved = False
        for _ in range(60):
            cand = project(q + step * grad)
            direction = cand - q
            dist = float(np.linalg.norm(direction))
            if dist == 0.0:
                break
            cand_value = _rate_white(rx_w, eve_w, cand)
            gain = float(np.sum(np.conj(grad) * direction).real)
            if cand_value >= value + 1e-4 * gain:
                moved = True
                break
            step *= 0.5
            if step < 1e-18:
                break
        if not moved:
            break
        if cand_value - value < value_rtol * (1.0 + abs(value)):
            stall += 1
        else:
            stall = 0
        q, value = cand, cand_value
        if dist / step < stop or stall >= 3:
            break
    return value, q


def maximize_bin(bn: Bin, rho: float, opts: BinOptimizerOptions = BinOptimizerOptions()):
    """Best secrecy rate of one bin under a trace budget, by multi-start ascent.

    Restarts cover the zero matrix, uniform power, a rank-one beamformer
    along the strongest whitened-gain-ratio direction, and seeded random
    Wishart draws.  The returned rate is clamped at zero (the zero matrix is
    always feasible) and is a lower bound on the true bin optimum.
    """
    rho = float(rho)
    if rho < 0:
        raise ValueError("trace budget must be non-negative")
    n_tx = bn.n_tx
    dtype = float if bn.is_real else complex
    zero = np.zeros((n_tx, n_tx), dtype=dtype)
    if rho == 0.0:
        return 0.0, PsdCovariance(zero, 0.0)

    rx_w, eve_w = _whiten_bin(bn)
    ratio, v_top = max_ratio_direction(rx_w, eve_w)
    if not ratio > 1.0 + _ACTIVE_RTOL:
        # Whitened receiver gain nowhere beats the eavesdropper: the
        # determinant ratio is at most one for every PSD input.
        return 0.0, PsdCovariance(zero, rho)

    if bn.is_real:
        v_top = v_top.real / max(np.linalg.norm(v_top.real), 1e-300)
    starts = [
        zero,
        (rho / n_tx) * np.eye(n_tx, dtype=dtype),
        rho * np.multiply.outer(v_top, np.conj(v_top)).astype(dtype, copy=False),
    ]
    n_random = max(0, int(opts.restarts) - len(starts))
    for j in range(n_random):
        rng = np.random.default_rng([int(opts.seed) & 0xFFFFFFFF, bn.index, j])
        a = rng.standard_normal((n_tx, n_tx))
        if not bn.is_real:
            a = a + 1j * rng.standard_normal((n_tx, n_tx))
        w = a @ a.conj().T
        starts.append(rho * w / np.trace(w).real)

    best_value, best_q = -np.inf, zero
    for q0 in starts:
        value, q = _ascend(rx_w, eve_w, q0, rho, bn.is_real, opts.tol, opts.max_iter)
        if value > best_value:
            best_value, best_q = value, q
    if best_value <= 0.0:
        return 0.0, PsdCovariance(zero, rho)
    return best_value, PsdCovariance(best_q, rho)


@dataclass(frozen=True)
class AllocationOptions:
    restarts: int = 8
    seed: int = 0
    tol: float = 1e-8
    rho_grid: int = 64
    refine_rounds: int = 2
    threads: int = 1

    def bin_options(self, bin_index: int) -> BinOptimizerOptions:
        derived = int(np.random.SeedSequence([int(self.seed) & 0xFFFFFFFF, bin_index])
                      .generate_state(1)[0])
        return BinOptimizerOptions(
            restarts=self.restarts, seed=derived, tol=self.tol
        )


class _RateTable:
    """Monotone (rho, rate, Q) samples of one bin's rate-versus-power curve."""

    def __init__(self, zero_q):
        self.rhos = [0.0]
        self.rates = [0.0]
        self.qs = [zero_q]

    def insert(self, rho, rate, q):
        j = _bisect.bisect_left(self.rhos, rho)
        if j < len(self.rhos) and self.rhos[j] == rho:
            if rate > self.rates[j]:
                self.rates[j], self.qs[j] = rate, q
        else:
            self.rhos.insert(j, rho)
            self.rates.insert(j, rate)
            self.qs.insert(j, q)
        # restore monotonicity: a smaller-trace Q stays feasible at larger rho
        for i in range(1, len(self.rhos)):
            if self.rates[i] < self.rates[i - 1]:
                self.rates[i] = self.rates[i - 1]
                self.qs[i] = self.qs[i - 1]

    def best_at(self, mu, n):
        vals = [r / n - mu * p for r, p in zip(self.rates, self.rhos)]
        j = int(np.argmax(vals))
        # ties resolve to the smallest power
        while j > 0 and vals[j - 1] >= vals[j] - 1e-300:
            j -= 1
        return j

    def dual_term(self, mu, n):
        return max(r / n - mu * p for r, p in zip(self.rates, self.rhos))


def _light_solve(rx_w, eve_w, bn, rho, warm_q, v_top, tol, anchors=True):
    """Cheap per-bin solve used to fill rate tables.

    Uses the previous operating point rescaled to the new trace budget as a
    warm start; beamformer and uniform-power anchors run on cold starts and
    periodically during sweeps.  Accuracy is relaxed relative to the final
    polish in maximize_bin, which re-solves the chosen operating points with
    the full restart battery at full precision.
    """
    n_tx = bn.n_tx
    dtype = float if bn.is_real else complex
    starts = []
    if warm_q is not None:
        tr = float(np.trace(warm_q).real)
        if tr > 1e-300:
            starts.append(warm_q * (rho / tr))
    if anchors or not starts:
        starts.append(
            rho * np.multiply.outer(v_top, np.conj(v_top)).astype(dtype, copy=False)
        )
        if n_tx > 1 and warm_q is None:
            starts.append((rho / n_tx) * np.eye(n_tx, dtype=dtype))
    best_value, best_q = -np.inf, None
    for q0 in starts:
        value, q = _ascend(rx_w, eve_w, q0, rho, bn.is_real, max(tol, 1e-6), 120,
                           value_rtol=1e-10)
        if value > best_value:
            best_value, best_q = value, q
    return max(best_value, 0.0), best_q


def _map_ordered(fn, keys, threads):
    if threads <= 1 or len(keys) <= 1:
        return {k: fn(k) for k in keys}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(fn, keys))
    return dict(zip(keys, results))


def allocate_and_optimize(
    bins: BinSet, power: float, opts: AllocationOptions = AllocationOptions()
) -> CapacityResult:
    """Maximize the average per-bin secrecy rate under the block power budget.

    Only bins 0..n/2 are optimized; conjugate images are filled by symmetry
    and non-real bins count twice in the objective.  Power is split across
    bins by bisection on a multiplier over per-bin rate tables sampled on a
    logarithmic trace grid (refined around the chosen operating points), and
    the selected bins are then re-solved with the full restart set.  The
    dual bound is the Lagrangian bound of the table-restricted allocation
    problem and always dominates the reported capacity.
    """
    n = bins.n
    half = n // 2
    weights = np.ones(half + 1)
    if n % 2 == 0:
        weights[1:half] = 2.0
    else:
        weights[1:] = 2.0
    budget = float(n) * float(n) * float(power)

    half_bins = [bins.bin(k) for k in range(half + 1)]
    whitened = {}
    directions = {}
    active = []
    for k, bn in enumerate(half_bins):
        rx_w, eve_w = _whiten_bin(bn)
        ratio, v = max_ratio_direction(rx_w, eve_w)
        if ratio > 1.0 + _ACTIVE_RTOL:
            if bn.is_real:
                v = v.real / max(np.linalg.norm(v.real), 1e-300)
            whitened[k] = (rx_w, eve_w)
            directions[k] = v
            active.append(k)

    def zero_q(bn):
        dtype = float if bn.is_real else complex
        return np.zeros((bn.n_tx, bn.n_tx), dtype=dtype)

    def finish(rates_half, qs_half, budgets_half, dual, diagnostics):
        mats = [None] * n
        for k in range(half + 1):
            mats[k] = PsdCovariance(qs_half[k], budgets_half[k])
        for k in range(half + 1, n):
            mats[k] = PsdCovariance(np.conj(mats[n - k].matrix), mats[n - k].trace_budget)
        allocation = CovarianceAllocation(n=n, mats=tuple(mats), total_budget=budget)
        rates = np.zeros(n)
        rates[: half + 1] = rates_half
        rates[half + 1 :] = rates_half[1 : n - half][::-1]
        capacity = float(np.dot(weights, rates_half) / n)
        return CapacityResult(
            capacity_bits=capacity,
            allocation=allocation,
            dual_bound_bits=dual,
            per_bin_rates=rates,
            diagnostics=diagnostics,
        )

    if not active:
        rates_half = np.zeros(half + 1)
        qs_half = [zero_q(bn) for bn in half_bins]
        return finish(rates_half, qs_half, np.zeros(half + 1), 0.0,
                      {"active_bins": 0, "seed": opts.seed, "n": n})

    base_grid = np.geomspace(budget * 1e-8, budget, int(opts.rho_grid))

    def build_table(k):
        bn = half_bins[k]
        rx_w, eve_w = whitened[k]
        table = _RateTable(zero_q(bn))
        warm = None
        for j, rho in enumerate(base_grid):
            rate, q = _light_solve(rx_w, eve_w, bn, rho, warm, directions[k],
                                   opts.tol, anchors=(j % 8 == 0))
            table.insert(rho, rate, q)
            warm = q
        return table

    tables = _map_ordered(build_table, active, opts.threads)

    def choose(mu):
        return {k: tables[k].best_at(mu, n) for k in active}

    def total_power(chosen):
        return sum(weights[k] * tables[k].rhos[chosen[k]] for k in active)

    def bisect_mu():
        chosen0 = choose(0.0)
        if total_power(chosen0) <= budget:
            return 0.0, chosen0
        lo, hi = 0.0, 1.0 / n
        while total_power(choose(hi)) > budget:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if total_power(choose(mid)) > budget:
                lo = mid
            else:
                hi = mid
        return hi, choose(hi)

    mu_star, chosen = bisect_mu()

    for _ in range(int(opts.refine_rounds)):
        def refine_bin(k):
            table = tables[k]
            j = chosen[k]
            rho_j = table.rhos[j]
            lo = table.rhos[j - 1] if j > 0 else max(budget * 1e-10, rho_j * 1e-4)
            hi = table.rhos[j + 1] if j + 1 < len(table.rhos) else budget
            if rho_j == 0.0:
                lo = min(p for p in table.rhos if p > 0) * 1e-3
                hi = min(p for p in table.rhos if p > 0)
            lo = max(lo, budget * 1e-12)
            if hi <= lo:
                return []
            pts = np.geomspace(lo, hi, 16)
            bn = half_bins[k]
            rx_w, eve_w = whitened[k]
            out = []
            warm = table.qs[j]
            for rho in pts:
                rate, q = _light_solve(rx_w, eve_w, bn, rho, warm, directions[k],
                                       opts.tol, anchors=False)
                out.append((rho, rate, q))
            return out

        new_points = _map_ordered(refine_bin, active, opts.threads)
        for k in active:
            for rho, rate, q in new_points[k]:
                tables[k].insert(rho, rate, q)
        mu_star, chosen = bisect_mu()

    # spend the grid-quantization slack: rates are non-decreasing in the
    # trace budget, so scaling every positive operating point up to the
    # exact budget never hurts
    spent = total_power(chosen)
    if 0.0 < spent < budget:
        factor = budget / spent

        def rescale(k):
            table = tables[k]
            j = chosen[k]
            rho_j = table.rhos[j]
            if rho_j == 0.0:
                return None
            rho_new = rho_j * factor
            bn = half_bins[k]
            rx_w, eve_w = whitened[k]
            rate, q = _light_solve(rx_w, eve_w, bn, rho_new, table.qs[j],
                                   directions[k], opts.tol, anchors=False)
            return (rho_new, rate, q)

        scaled = _map_ordered(rescale, active, opts.threads)
        for k in active:
            if scaled[k] is None:
                continue
            rho_new, rate, q = scaled[k]
            tables[k].insert(rho_new, rate, q)
            chosen[k] = _bisect.bisect_left(tables[k].rhos, rho_new)

    # full-restart polish at the selected operating points
    def polish(k):
        table = tables[k]
        j = chosen[k]
        rho_k = table.rhos[j]
        if rho_k == 0.0:
            return 0.0, table.qs[j], rho_k
        rate, q = maximize_bin(half_bins[k], rho_k, opts.bin_options(k))
        if rate >= table.rates[j]:
            return rate, np.asarray(q.matrix), rho_k
        return table.rates[j], table.qs[j], rho_k

    polished = _map_ordered(polish, active, opts.threads)

    rates_half = np.zeros(half + 1)
    qs_half = [zero_q(bn) for bn in half_bins]
    budgets_half = np.zeros(half + 1)
    for k in active:
        rate, q, rho_k = polished[k]
        tables[k].insert(rho_k, rate, q)
        rates_half[k] = rate
        qs_half[k] = q
        budgets_half[k] = rho_k

    primal = float(np.dot(weights, rates_half) / n)
    mu_sweep = [0.0, mu_star]
    if mu_star > 0:
        mu_sweep += [mu_star * f for f in (0.25, 0.5, 0.9, 1.1, 2.0, 4.0)]
    dual = min(
        sum(weights[k] * tables[k].dual_term(mu, n) for k in active) + mu * budget
        for mu in mu_sweep
    )
    diagnostics = {
        "active_bins": len(active),
        "n": n,
        "seed": opts.seed,
        "restarts": opts.restarts,
        "mu": mu_star,
        "duality_gap": dual - primal,
        "table_points": sum(len(tables[k].rhos) for k in active),
        "power_allocated": total_power(chosen),
        "budget": budget,
    }
    return finish(rates_half, qs_half, budgets_half, dual, diagnostics)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    capacity_bits: float
    delta_prev: float | None


def convergence_study(
    channel: MimoWiretapChannel,
    n_list,
    power: float | None = None,
    opts: AllocationOptions = AllocationOptions(),
):
    """Capacities of the circularized channel for increasing block lengths."""
    power = channel.power if power is None else power
    rows = []
    prev = None
    for n in n_list:
        result = allocate_and_optimize(build_bins(channel, int(n)), power, opts)
        delta = None if prev is None else abs(result.capacity_bits - prev)
        rows.append(ConvergenceRow(int(n), result.capacity_bits, delta))
        prev = result.capacity_bits
    return rows
