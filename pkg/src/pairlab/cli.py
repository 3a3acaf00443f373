"""Command line: ``pairlab run|report|validate``.

Exit codes: 0 success, 2 validation failure, 3 numeric-guard abort.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import ValidationError, load_config
from .meanfield import NumericalGuardError
from .report import write_report
from .runio import RunDir

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_GUARD = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pairlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute an experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default=None)
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--seed", type=int, default=None)
    rep = sub.add_parser("report", help="write report.md for a run directory")
    rep.add_argument("--out", required=True)
    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("--config", required=True)
    val.add_argument("--seed", type=int, default=None)
    return p


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "validate":
        try:
            _load(args)
        except ValidationError as exc:
            print(f"invalid config: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        print("config ok")
        return EXIT_OK

    if args.command == "report":
        try:
            path = write_report(args.out)
        except FileNotFoundError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_VALIDATION
        print(path.read_text())
        return EXIT_OK

    try:
        cfg = _load(args)
    except ValidationError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    out = args.out or cfg.out
    if not out:
        print("invalid config: out: no output directory (fix: pass --out DIR)", file=sys.stderr)
        return EXIT_VALIDATION
    if args.threads < 1:
        print("invalid config: threads must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    from .experiments import run_experiment
    run = RunDir(Path(out), cfg.to_dict(), __version__)
    try:
        run_experiment(cfg, run, args.threads)
    except NumericalGuardError as exc:
        run.manifest["error"] = str(exc)
        run.finish("guard-abort")
        print(f"numeric guard abort: {exc}", file=sys.stderr)
        return EXIT_GUARD
    run.finish("complete")
    write_report(out)
    print(f"run complete: {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
