"""Command line entry point: ``weakkam run <config>`` and ``weakkam refine <config> --levels k``.

Exit codes: 0 all assertions pass, 2 an assertion failed, 3 the config is invalid.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import bundled_config, load_config
from .errors import ConfigError, RefinementNotDecreasing, WeakKAMError
from .pipeline import refine, run_pipeline

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 2, 3


def _resolve(path: str) -> str:
    """A filesystem path, or the name of a bundled config (``pendulum``)."""
    if os.path.exists(path):
        return path
    return str(bundled_config(path))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weakkam", description="Vanishing-discount experiments on a 1-D torus.")
    p.add_argument("--seed", type=int, default=None, help="ignored; the pipeline is deterministic")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the full pipeline on a config")
    r.add_argument("config")
    r.add_argument("--out", default=None, help="output directory (default: [run] output)")
    r.add_argument("--oracle", action="store_true", help="enable the small-grid brute-force cross-checks")
    r.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)

    f = sub.add_parser("refine", help="grid refinement study against closed forms")
    f.add_argument("config")
    f.add_argument("--levels", type=int, default=3)
    f.add_argument("--out", default=None)
    f.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    return p


def _cmd_run(args) -> int:
    cfg = load_config(_resolve(args.config))
    out = args.out or cfg.run.output
    report = run_pipeline(cfg, out_dir=out, oracle=True if args.oracle else None)
    for rec in report.records:
        print(f"{'PASS' if rec.passed else 'FAIL'}  {rec.stage:<22} {rec.detail}")
    print(f"{cfg.name}: {'PASS' if report.passed else 'FAIL'} ({len(report.failures())} failed stages); "
          f"outputs in {out}")
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_refine(args) -> int:
    cfg = load_config(_resolve(args.config))
    if args.levels < 2:
        raise ConfigError("--levels must be at least 2")
    rep = refine(cfg, args.levels, raise_on_failure=False)
    print(f"{'N':>6} {'tau':>12} {'W':>4} {'c_error':>12} {'barrier_error':>14} {'limit_error':>12}")
    for r in rep.rows:
        print(f"{r.N:>6} {r.tau:>12.6g} {r.W:>4} {r.c_error:>12.4e} {r.barrier_error:>14.4e} {r.limit_error:>12.4e}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        rep.to_csv(os.path.join(args.out, "refinement.csv"))
        with open(os.path.join(args.out, "refinement.json"), "w") as fh:
            json.dump({"passed": rep.passed, "not_decreasing": rep.failures}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    for name in rep.failures:
        print(f"FAIL  {name} does not decrease under refinement")
    return EXIT_OK if rep.passed else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_refine(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RefinementNotDecreasing as exc:
        print(f"FAIL  {exc}", file=sys.stderr)
        return EXIT_FAIL
    except WeakKAMError as exc:
        print(f"FAIL  {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
