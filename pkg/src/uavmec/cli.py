"""Command line entry point.

    uavmec [run] --method all --slots 200 --vehicles 20 --seeds 0-9 --out results
    uavmec schema          # config keys, units, defaults and CSV columns as JSON

The default config file is taken from ``$UAVMEC_CONFIG`` when ``--config`` is
not given.  Exit status is 0 on full success, 1 if any cell failed and 2 on a
usage or configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .config import ENV_CONFIG, ConfigError, parse_config
from .harness import expand_methods, run_experiment
from .schema import METHODS, describe


def int_list(text: str) -> tuple:
    """Parse ``"1,2,5"`` or ``"0-9"`` (inclusive) or a mix of both."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        if sep and lo:
            a, b = int(lo), int(hi)
            if b < a:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            out.extend(range(a, b + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return tuple(out)


def positive_int_list(text: str) -> tuple:
    vals = int_list(text)
    if any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("values must be positive")
    return vals


def positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def emit_list(text: str) -> tuple:
    vals = tuple(v.strip() for v in text.split(",") if v.strip())
    bad = [v for v in vals if v not in ("csv", "json")]
    if bad or not vals:
        raise argparse.ArgumentTypeError(f"expected csv and/or json, got {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uavmec", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command")
    run = sub.add_parser("run", help="run an experiment (default command)")
    run.add_argument("--config", help=f"JSON config file (default: ${ENV_CONFIG})")
    run.add_argument("--method", choices=list(METHODS) + ["all"], help="method to run")
    run.add_argument("--slots", type=positive_int, help="slots per run")
    run.add_argument("--vehicles", type=positive_int_list, help="vehicle count or list, e.g. 10,20,30")
    run.add_argument("--seeds", type=int_list, help="seed list, e.g. 0-9 or 1,4,7")
    run.add_argument("--out", help="output directory")
    run.add_argument("--workers", type=positive_int, help="parallel worker processes")
    run.add_argument("--emit", type=emit_list, help="csv,json")
    run.add_argument("--quiet", action="store_true", help="do not print the summary")
    sub.add_parser("schema", help="print the configuration and CSV schema")
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in ("run", "schema", "-h", "--help"):
        argv.insert(0, "run")
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        print(json.dumps(describe(), indent=2, sort_keys=True))
        return 0
    try:
        exp = parse_config(args.config)
    except (ConfigError, OSError) as err:
        print(f"uavmec: config error: {err}", file=sys.stderr)
        return 2
    changes = {}
    if args.method:
        changes["methods"] = tuple(expand_methods([args.method]))
    if args.slots:
        changes["n_slots"] = args.slots
    if args.vehicles:
        changes["vehicles"] = args.vehicles
    if args.seeds:
        changes["seeds"] = args.seeds
    if args.out:
        changes["out_dir"] = args.out
    if args.workers:
        changes["workers"] = args.workers
    if args.emit:
        changes["emit"] = args.emit
    exp = dataclasses.replace(exp, **changes)

    report = run_experiment(exp)
    for c in report.failed:
        print(f"uavmec: cell {c.method} V={c.n_vehicles} seed={c.seed} failed: {c.error}",
              file=sys.stderr)
    if not args.quiet:
        for v, methods in report.summary["by_vehicles"].items():
            for m, e in methods.items():
                print(f"V={v:>3} {m:<9} delay={e['mean_delay']['mean']:.4f}s "
                      f"e_tr={e['mean_e_tr']['mean']:.4f}J E={e['mean_energy']['mean']:.3f}J "
                      f"dedr_cv={e['dedr_cv']['mean']:.3f}")
        for kind, path in report.files.items():
            print(f"wrote {kind}: {path}")
    return 1 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
