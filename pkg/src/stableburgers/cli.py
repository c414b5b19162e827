"""Command line entry point: ``stableburgers run|validate|version``."""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .config import ConfigError, load_config
from .runner import run, write_outputs

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stableburgers",
                                 description="Monte Carlo experiments for Burgers flow with stable initial data.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run a scenario and write its outputs"),
                        ("validate", "check a config and print it with defaults filled in")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="path to a JSON config (or inline JSON text)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=None, help="override the worker count")
        if name == "run":
            p.add_argument("--out-dir", default=".", help="directory for output files (default: .)")
            p.add_argument("--format", choices=("csv", "json"), default="csv",
                           help="csv writes the table and the JSON report; json writes the report only")
    sub.add_parser("version", help="print the package version")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "version":
        print(__version__)
        return EXIT_OK
    try:
        cfg = load_config(args.config).with_overrides(seed=args.seed, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(json.dumps(cfg.to_dict(), sort_keys=True, indent=2))
        return EXIT_OK
    report = run(cfg)
    paths = write_outputs(report, args.out_dir, args.format)
    print(f"{cfg.scenario} seed={cfg.seed} status={report.status} wall_time={report.wall_time:.2f}s",
          file=sys.stderr)
    for p in paths:
        print(p)
    if report.status != "ok":
        print(f"runtime error: {report.error}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
