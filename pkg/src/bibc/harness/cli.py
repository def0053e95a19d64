"""Command-line entry point ``bibc-sim``."""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, load_config
from .runner import PRESETS, run_scenario

OUT_ENV = "BIBC_SIM_OUT"
DEFAULT_OUT = "bibc-out"

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bibc-sim", description="Bistatic backscatter Monte Carlo runs.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario preset and write CSV artifacts")
    run.add_argument("--config", required=True, help="JSON config file (empty file = defaults)")
    run.add_argument("--scenario", required=True, choices=PRESETS)
    run.add_argument("--out", default=None, help=f"output directory (default: ${OUT_ENV} or ./{DEFAULT_OUT})")
    run.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    run.add_argument("--trials", type=_positive_int, default=None, help="Monte Carlo trials override")
    run.add_argument("--threads", type=_positive_int, default=1)

    val = sub.add_parser("validate", help="check a config file and print the resolved values")
    val.add_argument("--config", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        from .config import dump_config

        sys.stdout.write(dump_config(cfg))
        return EXIT_OK
    out = args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT
    try:
        art = run_scenario(cfg, args.scenario, out, seed=args.seed, trials=args.trials, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - report any failure as a runtime error
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"{art.run_id} {art.out_dir}")
    for name in art.files:
        print(f"  {name}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
