"""Command-line front end.

Verbs: ``scalar`` (closed-form waterfilling for 1x1x1 channels), ``mimo``
(per-bin covariance optimization), ``converge`` (block-length sweep),
``positivity`` (whitened gain-ratio test), ``plc`` (periodic channels via
the block-MIMO reduction), and ``selftest`` (oracle battery).  All verbs
read JSON descriptions, print a JSON summary on stdout, optionally write a
CSV plus a manifest, and log to stderr only.

Exit codes: 0 success, 2 parse error, 3 validation error, 4 numerical
(indefinite/singular noise), 5 size or dimension error, 6 output I/O error,
1 anything else.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .channel import build_bins
from .errors import (
    BlockTooShort,
    DimensionMismatch,
    IoError,
    NotPositiveDefinite,
    ParseError,
    PeriodTooShort,
    SingularNoise,
    ValidationError,
    WiresecError,
)
from .io import RunManifest, Stopwatch, parse_channel_file, parse_plc_file, write_csv
from .mimo import AllocationOptions, allocate_and_optimize, convergence_study
from .oracles import OracleConfig, mc_noise_dft_covariance, rank_one_sphere_oracle, scalar_grid_oracle
from .plc import plc_secrecy_capacity
from .positivity import positivity_check
from .scalar import discrete_scalar_capacity, snr_densities, waterfill

log = logging.getLogger("wiresec")


def _default_threads() -> int:
    raw = os.environ.get("WIRESEC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wiresec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"wiresec {__version__}")
    p.add_argument(
        "--threads",
        type=int,
        default=_default_threads(),
        help="parallel bin evaluation (default serial; env WIRESEC_THREADS)",
    )
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("scalar", help="scalar waterfilling secrecy capacity")
    s.add_argument("--channel", required=True)
    s.add_argument("--power", type=float, default=None, help="override the file's power")
    s.add_argument("--grid", type=int, default=2048)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--out", default=None, help="CSV path (omega, alpha_r, alpha_e, c_x)")

    m = sub.add_parser("mimo", help="per-bin covariance optimization")
    m.add_argument("--channel", required=True)
    m.add_argument("--bins", type=int, default=512)
    m.add_argument("--power", type=float, default=None)
    m.add_argument("--restarts", type=int, default=8)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--tol", type=float, default=1e-8)
    m.add_argument("--out", default=None, help="CSV path (bin, omega, rate_bits, trace)")

    c = sub.add_parser("converge", help="capacity versus block length")
    c.add_argument("--channel", required=True)
    c.add_argument("--bins-list", default="64,128,256,512")
    c.add_argument("--power", type=float, default=None)
    c.add_argument("--restarts", type=int, default=8)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--out", default=None, help="CSV path (n, capacity_bits)")

    q = sub.add_parser("positivity", help="strict-positivity gain-ratio test")
    q.add_argument("--channel", required=True)
    q.add_argument("--grid", type=int, default=4096)
    q.add_argument("--out", default=None, help="CSV path (omega, ratio)")

    w = sub.add_parser("plc", help="periodic channel via the block-MIMO reduction")
    w.add_argument("--plc", required=True)
    w.add_argument("--bins", type=int, default=512)
    w.add_argument("--power", type=float, default=None)
    w.add_argument("--restarts", type=int, default=8)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--tol", type=float, default=1e-8)
    w.add_argument("--block-multiplier", type=int, default=1)
    w.add_argument("--out", default=None, help="CSV path (bin, omega, rate_bits, trace)")

    t = sub.add_parser("selftest", help="run the oracle battery")
    t.add_argument("--seed", type=int, default=0)
    return p


def _emit_summary(payload: dict):
    print(json.dumps(payload, sort_keys=True))


def _override_power(channel, power):
    if power is None:
        return channel
    import dataclasses

    return dataclasses.replace(channel, power=float(power))


def _snr_db(value: float):
    return 10.0 * math.log10(value) if value > 0 else None


def _cmd_scalar(args) -> int:
    channel = _override_power(parse_channel_file(args.channel), args.power)
    with Stopwatch() as clock:
        grid = snr_densities(channel, args.grid)
        sol = waterfill(grid, channel.power, args.tol)
    weights = np.ones_like(grid.omegas)
    weights[0] = weights[-1] = 0.5
    weights /= weights.sum()
    summary = {
        "capacity_bits": sol.capacity_bits,
        "mu": None if math.isnan(sol.water_level) else sol.water_level,
        "power_used": sol.power_used,
        "snr_rx_db": _snr_db(channel.power * float(weights @ grid.rx)),
        "snr_eve_db": _snr_db(channel.power * float(weights @ grid.eve)),
    }
    if args.out:
        write_csv(
            args.out,
            ["omega", "alpha_r", "alpha_e", "c_x"],
            zip(grid.omegas, grid.rx, grid.eve, sol.spectrum),
        )
        RunManifest(
            verb="scalar",
            input_path=str(args.channel),
            params={"grid": args.grid, "tol": args.tol, "power": channel.power},
            seed=None,
            wall_clock_s=clock.elapsed,
        ).write(args.out)
    _emit_summary(summary)
    return 0


def _allocation_options(args) -> AllocationOptions:
    return AllocationOptions(
        restarts=args.restarts, seed=args.seed, tol=args.tol, threads=args.threads
    )


def _cmd_mimo(args) -> int:
    channel = _override_power(parse_channel_file(args.channel), args.power)
    opts = _allocation_options(args)
    with Stopwatch() as clock:
        bins = build_bins(channel, args.bins)
        result = allocate_and_optimize(bins, channel.power, opts)
    if args.out:
        rows = [
            (k, 2.0 * math.pi * k / args.bins, result.per_bin_rates[k],
             result.allocation.mats[k].trace)
            for k in range(args.bins)
        ]
        write_csv(args.out, ["bin", "omega", "rate_bits", "trace"], rows)
        RunManifest(
            verb="mimo",
            input_path=str(args.channel),
            params={
                "bins": args.bins,
                "restarts": args.restarts,
                "tol": args.tol,
                "power": channel.power,
                "threads": args.threads,
            },
            seed=args.seed,
            wall_clock_s=clock.elapsed,
        ).write(args.out)
    _emit_summary(
        {
            "capacity_bits": result.capacity_bits,
            "dual_bound_bits": result.dual_bound_bits,
            "n": args.bins,
            "seed": args.seed,
        }
    )
    return 0


def _cmd_converge(args) -> int:
    channel = _override_power(parse_channel_file(args.channel), args.power)
    try:
        n_list = [int(tok) for tok in args.bins_list.split(",") if tok.strip()]
    except ValueError as exc:
        raise ParseError(f"--bins-list must be comma-separated integers: {exc}")
    if not n_list:
        raise ParseError("--bins-list is empty")
    opts = _allocation_options(args)
    with Stopwatch() as clock:
        rows = convergence_study(channel, n_list, channel.power, opts)
    if args.out:
        write_csv(args.out, ["n", "capacity_bits"], [(r.n, r.capacity_bits) for r in rows])
        RunManifest(
            verb="converge",
            input_path=str(args.channel),
            params={"bins_list": n_list, "restarts": args.restarts, "tol": args.tol,
                    "power": channel.power, "threads": args.threads},
            seed=args.seed,
            wall_clock_s=clock.elapsed,
        ).write(args.out)
    _emit_summary(
        {
            "capacity_bits": rows[-1].capacity_bits,
            "n": rows[-1].n,
            "deltas": [r.delta_prev for r in rows[1:]],
            "seed": args.seed,
        }
    )
    return 0


def _cmd_positivity(args) -> int:
    channel = parse_channel_file(args.channel)
    with Stopwatch() as clock:
        report = positivity_check(channel, grid_size=args.grid)
    if args.out:
        write_csv(args.out, ["omega", "ratio"], zip(report.omegas, report.ratios))
        RunManifest(
            verb="positivity",
            input_path=str(args.channel),
            params={"grid": args.grid},
            seed=None,
            wall_clock_s=clock.elapsed,
        ).write(args.out)
    _emit_summary({"positive": report.verdict, "measure_rad": report.positive_measure})
    return 0


def _cmd_plc(args) -> int:
    plc = parse_plc_file(args.plc)
    if args.power is not None:
        import dataclasses

        plc = dataclasses.replace(plc, power=float(args.power))
    opts = _allocation_options(args)
    with Stopwatch() as clock:
        capacity, result, block = plc_secrecy_capacity(
            plc, args.bins, opts, block_multiplier=args.block_multiplier
        )
    if args.out:
        rows = [
            (k, 2.0 * math.pi * k / args.bins, result.per_bin_rates[k],
             result.allocation.mats[k].trace)
            for k in range(args.bins)
        ]
        write_csv(args.out, ["bin", "omega", "rate_bits", "trace"], rows)
        RunManifest(
            verb="plc",
            input_path=str(args.plc),
            params={
                "bins": args.bins,
                "restarts": args.restarts,
                "tol": args.tol,
                "power": plc.power,
                "block_multiplier": args.block_multiplier,
                "block_len": block.block_len,
                "threads": args.threads,
            },
            seed=args.seed,
            wall_clock_s=clock.elapsed,
        ).write(args.out)
    _emit_summary(
        {
            "capacity_bits": capacity,
            "dual_bound_bits": result.dual_bound_bits / block.block_len,
            "n": args.bins,
            "block_len": block.block_len,
            "seed": args.seed,
        }
    )
    return 0


def _cmd_selftest(args) -> int:
    """Oracle battery: each check prints one PASS/FAIL line."""
    from .channel import MimoWiretapChannel, NoiseAutocorrelation

    cfg = OracleConfig(seed=args.seed, samples=20_000, grid=1024)
    checks = []

    flat = scalar_grid_oracle(np.ones(256), np.full(256, 0.25), 1.0, cfg)
    checks.append(("flat-channel value", abs(flat - 0.5 * math.log2(1.6)) < 1e-4))

    caps = [scalar_grid_oracle(np.ones(64), np.full(64, 0.25), p, cfg) for p in (0.5, 1.0, 2.0)]
    checks.append(("monotone in power", caps[0] < caps[1] < caps[2]))

    rng = np.random.default_rng(args.seed)
    a = rng.uniform(0.0, 3.0, 128)
    b = rng.uniform(0.0, 3.0, 128)
    perm = rng.permutation(128)
    same = abs(
        scalar_grid_oracle(a, b, 1.0, cfg) - scalar_grid_oracle(a[perm], b[perm], 1.0, cfg)
    )
    checks.append(("permutation invariance", same < 1e-9))

    channel = MimoWiretapChannel.scalar([1.0, 1.0], [3.1, -3.1], [1.0, 0.0], [1.0, 0.0], 1.0)
    bn = build_bins(channel, 8).bin(1)
    rho = 3.0
    alpha_r = float(np.abs(bn.rx_gain[0, 0]) ** 2 / bn.rx_noise_cov[0, 0].real)
    alpha_e = float(np.abs(bn.eve_gain[0, 0]) ** 2 / bn.eve_noise_cov[0, 0].real)
    expect = max(0.0, 0.5 * math.log2((1 + alpha_r * rho) / (1 + alpha_e * rho)))
    checks.append(
        ("scalar sphere oracle", abs(rank_one_sphere_oracle(bn, rho, cfg) - expect) < 1e-12)
    )

    est = mc_noise_dft_covariance(NoiseAutocorrelation.white(1, 2.0), 8, 3, cfg)
    checks.append(("white-noise bin covariance", est.consistent_with(np.array([[16.0]]))))

    cross = mc_noise_dft_covariance(NoiseAutocorrelation.white(1, 1.0), 8, 1, cfg, k2=2)
    checks.append(("cross-bin independence", cross.consistent_with(np.zeros((1, 1)))))

    grid = snr_densities(channel, 512)
    direct = waterfill(grid, 1.0).capacity_bits
    via_oracle = scalar_grid_oracle(
        grid.rx, grid.eve, 1.0, cfg,
        weights=np.r_[0.5, np.ones(510), 0.5],
    )
    checks.append(("waterfill against grid oracle", abs(direct - via_oracle) < 1e-4))

    failed = 0
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
        failed += 0 if ok else 1
    return 0 if failed == 0 else 1


_DISPATCH = {
    "scalar": _cmd_scalar,
    "mimo": _cmd_mimo,
    "converge": _cmd_converge,
    "positivity": _cmd_positivity,
    "plc": _cmd_plc,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.verb](args)
    except ParseError as exc:
        log.error("parse error: %s", exc)
        return 2
    except ValidationError as exc:
        log.error("validation error: %s", exc)
        return 3
    except (NotPositiveDefinite, SingularNoise) as exc:
        log.error("numerical error: %s", exc)
        return 4
    except (BlockTooShort, PeriodTooShort, DimensionMismatch) as exc:
        log.error("size error: %s", exc)
        return 5
    except IoError as exc:
        log.error("output error: %s", exc)
        return 6
    except WiresecError as exc:
        log.error("error: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
