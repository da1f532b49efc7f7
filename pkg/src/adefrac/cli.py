"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 divergence, 3 failed rate
assertion.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import bench
from .solvers import DivergenceError

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_RATES = 0, 1, 2, 3


def _int_list(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="adefrac",
        description="ADE solvers: convergence studies and fractional-diffusion simulations.",
    )
    p.add_argument("experiment", nargs="?", help="one of: " + ", ".join(bench.EXPERIMENTS))
    p.add_argument("--config", help="key = value configuration file (CLI flags override it)")
    p.add_argument("--study", choices=("time", "space"), help="ladder over N (time) or M (space)")
    p.add_argument("--simulate", action="store_true", help="run to T writing snapshots instead of a study")
    p.add_argument("--M", type=int)
    p.add_argument("--M2", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--J", type=int)
    p.add_argument("--ladder", type=_int_list, help="comma-separated resolutions, doubling")
    p.add_argument("--seed", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--max-history", type=int, help="GL history cap (0 = unlimited)")
    p.add_argument("--threshold", type=float, help="GL weight magnitude cut-off")
    p.add_argument("--out", help="output directory")
    p.add_argument("--snapshots", help="snapshot cadence k, or a comma-separated list of steps")
    p.add_argument("--paper-exact", action="store_true", help="use N = 100000 for the 2D space ladder")
    p.add_argument("--table-convention", action="store_true",
                   help="count M as nodes in space ladders and double N in 1D time ladders")
    p.add_argument("--assert-rates", action="store_true", help="exit 3 when final rates miss second order")
    p.add_argument("--jobs", type=int, help="run ladder rungs in parallel processes")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args) -> bench.RunConfig:
    values = bench.parse_config_text(open(args.config).read()) if args.config else {}
    if args.experiment:
        values["experiment"] = args.experiment
    simple = ("study", "M", "M2", "N", "T", "J", "ladder", "seed", "noise", "threshold", "out", "jobs")
    for name in simple:
        value = getattr(args, name)
        if value is not None:
            values[name] = value
    if args.max_history is not None:
        values["max_history"] = args.max_history or None
    if args.snapshots:
        steps = _int_list(args.snapshots)
        if "," in args.snapshots:
            values["snapshot_steps"] = steps
        else:
            values["snapshots"] = steps[0]
    for flag in ("paper_exact", "table_convention", "assert_rates"):
        if getattr(args, flag):
            values[flag] = True
    return bench.config_from_mapping(values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = config_from_args(args)
    except (bench.ConfigError, ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.simulate or config.experiment == "turing":
            result = bench.run_simulation(config)
            print(f"wrote {len(result.snapshot_paths)} snapshots and {result.trace_path}")
            return EXIT_OK
        report = bench.run_convergence_study(config)
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except bench.ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    bench.log_report(report)
    path = bench.write_report(report, config)
    print(path.read_text(), end="")
    if config.assert_rates:
        failures = bench.check_rates(report, config.experiment)
        if failures:
            for f in failures:
                print(f"rate assertion failed: {f}", file=sys.stderr)
            return EXIT_RATES
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
