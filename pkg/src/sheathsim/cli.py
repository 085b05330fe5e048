"""Command-line front end.

One subcommand per run mode; all numeric settings come from the config file
so runs are reproducible from a single artifact.  Exit codes: 0 success,
1 configuration problem, 2 solver failure.
"""

import argparse
import sys

from . import pipelines
from .config import load_config
from .csvio import format_float
from .errors import ConfigError, SheathsimError

_MODE_HELP = {
    "profile": "solve the leading wall-layer profile",
    "limit": "run the quasineutral limit system",
    "simulate": "run the coupled system at finite epsilon",
    "converge": "epsilon sweep against the limit (rate fits)",
    "entropy": "relative-entropy series of a well-prepared run",
}


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sheathsim",
        description="Plasma sheath boundary-layer and quasineutral-limit "
                    "toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in _MODE_HELP.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True,
                       help="path to a key = value config file")
        p.add_argument("--output", default=None,
                       help="output directory (overrides the config)")
        p.add_argument("--seed-free", action="store_true",
                       help="assert that no randomness is used anywhere "
                            "(always true; the flag documents the contract)")
        if name == "converge":
            p.add_argument("--jobs", type=_positive_int, default=1,
                           help="concurrent workers, one per epsilon")
    return parser


def _summary_line(mode: str, values: dict) -> str:
    parts = []
    for key, value in values.items():
        if isinstance(value, float):
            parts.append(f"{key}={format_float(value)}")
        else:
            parts.append(f"{key}={value}")
    return f"{mode}: " + " ".join(parts)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, default_mode=args.command)
    except OSError as exc:
        print(f"config error: cannot read '{args.config}': {exc}",
              file=sys.stderr)
        return 1
    except ConfigError as exc:
        for finding in exc.errors:
            print(f"config error: {finding}", file=sys.stderr)
        return 1
    if cfg.mode != args.command:
        print(f"config error: mode: config says '{cfg.mode}' but the "
              f"subcommand is '{args.command}'", file=sys.stderr)
        return 1
    outdir = args.output if args.output is not None else cfg.output_dir

    try:
        if args.command == "profile":
            summary = pipelines.run_profile_pipeline(cfg, outdir)
        elif args.command == "limit":
            summary = pipelines.run_limit_pipeline(cfg, outdir)
        elif args.command == "simulate":
            summary = pipelines.run_simulate_pipeline(cfg, outdir)
        elif args.command == "converge":
            summary = pipelines.run_converge_pipeline(cfg, outdir,
                                                      jobs=args.jobs)
        else:
            summary = pipelines.run_entropy_pipeline(cfg, outdir)
    except ConfigError as exc:
        for finding in exc.errors:
            print(f"config error: {finding}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"config error: {args.command}: {exc}", file=sys.stderr)
        return 1
    except SheathsimError as exc:
        print(f"solver failure: {args.command}: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 2

    if summary.pop("near_wall_speed_warning", False):
        print("warning: near-wall flow speed exceeds sqrt(3*ion_temp)/2",
              file=sys.stderr)
    print(_summary_line(args.command, summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
