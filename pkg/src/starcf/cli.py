"""Command line entry point writing experiment results as CSV.

This module imports nothing numeric at load time: the worker threads of
the underlying linear-algebra libraries are pinned to one before numpy
first loads, which keeps reduction order fixed and output files
byte-identical across machines and thread settings. Library users who
import the package normally keep their own threading configuration.

Exit codes: 0 on success, 1 for configuration problems (bad flags,
unreadable or invalid config file, impossible sweep values), 2 for
numerical failures (ill-conditioned systems, sampled rates missing the
validation tolerance).
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from .errors import ConfigError, NumericalError

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)


def _pin_threads():
    for var in _THREAD_VARS:
        os.environ[var] = "1"


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as config errors."""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="starcf",
        description=(
            "Downlink spectral-efficiency experiments for a cell-free "
            "system assisted by an active dual-mode surface."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "fig1": "closed-form sum rate per downlink instant",
        "fig2": "closed-form vs sampled average rate across AP counts",
        "fig3": "sum rate across surface sizes and operating modes",
        "table1": "coherence-block lengths from the aging correlation",
        "validate": "per-user agreement between the two evaluations",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", metavar="PATH",
                       help="JSON config file (defaults apply when omitted)")
        p.add_argument("--seed", type=int,
                       help="override the config seed")
        p.add_argument("--trials", type=int,
                       help="sampled trials per evaluation (fig2, validate)")
        p.add_argument("--seeds-per-point", type=int, dest="seeds_per_point",
                       help="deployments averaged per sweep point "
                            "(fig2, fig3)")
        p.add_argument("--out", metavar="PATH", required=True,
                       help="output CSV path")
    return parser


def _load_config(args):
    from .scenario import SystemConfig

    cfg = (SystemConfig.from_file(args.config) if args.config
           else SystemConfig())
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def main(argv=None) -> int:
    _pin_threads()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        from . import experiments as exp

        cfg = _load_config(args)
        if args.command == "fig1":
            header, rows = exp.run_fig1(cfg)
        elif args.command == "fig2":
            header, rows = exp.run_fig2(
                cfg, trials=args.trials,
                seeds_per_point=args.seeds_per_point,
            )
        elif args.command == "fig3":
            header, rows = exp.run_fig3(
                cfg, seeds_per_point=args.seeds_per_point,
            )
        elif args.command == "table1":
            header, rows = exp.run_table1(cfg)
        else:
            header, rows, ok = exp.run_validate(cfg, trials=args.trials)
            _write_csv(args.out, header, rows)
            if not ok:
                print("validate: sampled rate outside tolerance; see "
                      f"{args.out}", file=sys.stderr)
                return 2
            return 0
        _write_csv(args.out, header, rows)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
