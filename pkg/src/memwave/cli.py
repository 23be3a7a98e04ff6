"""Command-line entry point.

    memwave <subcommand> --config <file> [--out <dir>] [--seed <int>]

Exit codes: 0 success, 1 config error, 2 numeric failure, 3 a declared
acceptance check failed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import SUBCOMMANDS, ConfigError, parse_config
from .runner import EXIT_CONFIG, run


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="memwave",
        description="spectral experiments for the memory-damped "
                    "sigma-evolution model")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, default=None,
                        help="JSON config file (defaults apply if omitted)")
        sp.add_argument("--out", type=Path, default=Path("memwave_out"),
                        help="output directory")
        sp.add_argument("--seed", type=int, default=0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    text = ""
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as e:
            print(f"config error: {e}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        config = parse_config(text, args.subcommand, seed=args.seed)
    except ConfigError as e:
        for path, msg in e.problems:
            print(f"config error at {path}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    status = run(config, args.out)
    if status == 0:
        print(f"ok: artifacts in {args.out}")
    else:
        print(f"exit status {status}: see {args.out}/summary.json",
              file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
