"""Command-line entry point: ``mqsense run | validate | version``."""
from __future__ import annotations

import argparse
import sys

from . import __version__, config as configmod
from .errors import ConfigError, MQSenseError


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mqsense", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute the pipelines of a config file")
    run.add_argument("config")
    run.add_argument("--out", default="mqsense-out", help="output directory (default: %(default)s)")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--threads", type=int, help="worker threads for sweeps")
    val = sub.add_parser("validate", help="check a config file against the schema")
    val.add_argument("config")
    sub.add_parser("version", help="print the package version")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "version":
        print(__version__)
        return 0
    try:
        raw = configmod.load(args.config)
        if args.command == "validate":
            print(f"{args.config}: ok")
            return 0
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.threads is not None:
            raw["threads"] = args.threads
        configmod.validate(raw)
        cfg = configmod.resolve(raw)
        from .pipelines import run

        ctx = run(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MQSenseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"run {ctx.run_id}: {len(ctx.outputs)} files in {ctx.out}")
    for w in ctx.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
