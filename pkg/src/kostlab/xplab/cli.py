"""``singulab`` command line: run experiments, rebuild reports, verify acceptance."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import ConfigError, ExcessiveDiscards
from .config import KINDS, ExperimentConfig, load_config
from .report import emit_report, read_csv
from .runner import primary_statistic, run_experiment

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 2, 3

DEFAULTS = {
    "zeros": dict(degrees=(16, 64, 256), trials=200),
    "crit": dict(degrees=(2, 4, 6, 8), trials=100),
    "minima": dict(degrees=(2, 4, 6, 8), trials=100),
    "fold": dict(degrees=(4, 8, 16), trials=50),
    "cusp": dict(degrees=(6, 12, 24), trials=50),
    "components": dict(degrees=(16, 36, 64), trials=50),
    "semicont": dict(degrees=(10,), trials=50),
    "coupled": dict(degrees=(8, 32, 128, 512), trials=50),
    "knot": dict(degrees=(12, 50, 100), trials=100),
    "kacrice": dict(degrees=(4, 16, 64), trials=10),
    "scaling": dict(degrees=(16, 64, 256), trials=200),
}


def build_parser():
    p = argparse.ArgumentParser(prog="singulab",
                                description="Kostlan random-map singularity experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        s = sub.add_parser(kind, help=f"run a {kind} experiment")
        s.add_argument("--config", type=Path, help="key = value config file")
        s.add_argument("--seed", type=int, help="override the root seed")
        s.add_argument("--threads", type=int, help="worker processes (or SINGULAB_THREADS)")
        s.add_argument("--out", type=Path, help="output directory")
        s.add_argument("--timing", action="store_true", help="record per-trial runtimes")
    r = sub.add_parser("report", help="rebuild JSON/SVG from a records CSV")
    r.add_argument("csv", type=Path)
    r.add_argument("--statistic", help="statistic to summarize (default: first in file)")
    r.add_argument("--out", type=Path, help="output directory (default: next to the CSV)")
    v = sub.add_parser("verify", help="run the acceptance criteria")
    v.add_argument("--only", help="comma-separated criterion numbers, e.g. 1,8,13")
    return p


def _config(args) -> ExperimentConfig:
    if args.config is not None:
        try:
            cfg = load_config(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        if cfg.kind != args.command:
            raise ConfigError(f"config is for {cfg.kind!r}, not {args.command!r}",
                              key="experiment")
    else:
        cfg = ExperimentConfig(kind=args.command, **DEFAULTS[args.command])
    return cfg.with_overrides(seed=args.seed, threads=args.threads,
                              out=str(args.out) if args.out else None,
                              timing=True if args.timing else None)


def _run(args) -> int:
    cfg = _config(args)
    try:
        records = run_experiment(cfg)
        status = EXIT_OK
    except ExcessiveDiscards as exc:
        print(f"error: {exc}", file=sys.stderr)
        records, status = exc.records, EXIT_FAIL
    stat = primary_statistic(cfg)
    for p in emit_report(records, stat, cfg.out):
        print(p)
    return status


def _report(args) -> int:
    records = read_csv(args.csv)
    stat = args.statistic or records[0].statistic
    for p in emit_report(records, stat, args.out or args.csv.parent, formats=("json", "svg")):
        print(p)
    return EXIT_OK


def _verify(args) -> int:
    from .acceptance import CRITERIA, run_all
    numbers = None
    if args.only:
        try:
            numbers = [int(s) for s in args.only.split(",")]
        except ValueError:
            raise ConfigError("--only expects comma-separated integers") from None
        if any(n not in CRITERIA for n in numbers):
            raise ConfigError(f"criteria are numbered 1..{len(CRITERIA)}")
    results = run_all(numbers, echo=lambda s: print(s, flush=True))
    failed = [c.number for c in results if not c.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {failed}" if failed else ""))
    return EXIT_FAIL if failed else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            return _report(args)
        if args.command == "verify":
            return _verify(args)
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
