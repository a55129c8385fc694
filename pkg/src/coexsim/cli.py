"""Command-line front end.

    coexsim run CONFIG [--out PATH] [--seed N] [--runs N] [--jobs N] [--format csv|json]
    coexsim allocate CONFIG
    coexsim validate CONFIG

Exit codes: 0 success, 1 config validation failure, 2 runtime or
infeasibility failure (some sweep rows carry an error status).
"""

from __future__ import annotations

import argparse
import os
import sys

from .coexistence import AccessMode, InfeasibleConfigError
from .config import ConfigError, load_config
from .fairness import ConvergenceError
from .phy import MS
from .scenarios import header_for, resolve_point, run_scenario, write_csv, write_json


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coexsim",
        description="Scheduled/CSMA-CA coexistence model and simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario sweep and write results")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output path (default from config)")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--runs", type=int, default=None)
    p_run.add_argument("--jobs", type=int, default=None,
                       help="ensemble worker processes (default: available cores)")
    p_run.add_argument("--format", choices=("csv", "json"), default=None)

    p_alloc = sub.add_parser("allocate", help="print the fair allocation only")
    p_alloc.add_argument("config")

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.runs is not None:
        cfg.runs = args.runs
    cfg.jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    if args.format is not None:
        cfg.fmt = args.format
    out = args.out or cfg.output or ("results.json" if cfg.fmt == "json" else "results.csv")

    rows = run_scenario(cfg)
    if cfg.fmt == "json":
        write_json(out, cfg, rows)
    else:
        write_csv(out, cfg, rows)
    bad = [r for r in rows if r.status != "ok"]
    print(f"wrote {out}: {len(rows)} rows ({len(header_for(rows, cfg.sweep_axis))} columns)"
          + (f", {len(bad)} with errors" if bad else ""))
    for row in bad:
        print(f"  {cfg.sweep_axis or 'point'}={row.sweep_value}: {row.status}",
              file=sys.stderr)
    return 2 if bad else 0


def _cmd_allocate(args) -> int:
    cfg = load_config(args.config)
    for mode in (AccessMode.PREEMPTIVE, AccessMode.OPPORTUNISTIC):
        point = resolve_point(cfg, mode=mode)
        pred = point.prediction
        n = point.stations.n
        print(f"{mode.value}: t_off* = {point.sched.mean_t_off / MS:.3f} ms "
              f"(c1 = {point.costs.c1 / 1000:.1f} us, c2 = {point.costs.c2 / 1000:.1f} us, "
              f"p_txA = {point.costs.p_tx_a:.4f})")
        print(f"  airtime: csma {pred.airtime_csma_full_slots:.4f} "
              f"({n}/{n + 1} = {n / (n + 1):.4f} at the fair point), "
              f"sched {pred.airtime_sched:.4f}")
        print(f"  throughput: wifi total {sum(pred.s_csma) / 1e6:.3f} Mb/s, "
              f"sched {pred.s_sched / 1e6:.3f} Mb/s")
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    resolve_point(cfg)  # force fair allocation and SimConfig construction
    print(f"{args.config}: ok (scenario {cfg.scenario.value}, "
          f"{len(cfg.sweep())} sweep point(s))")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "allocate":
            return _cmd_allocate(args)
        return _cmd_validate(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InfeasibleConfigError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
