"""Command-line entry point: run, compare-sinkhorn, selftest, validate-model."""
from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, ImoptError

EXIT_OK, EXIT_SELFTEST, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2, 3


def _cmd_run(args) -> int:
    from .bench import execute, format_summary, load_config
    from .trace import trace_csv

    cfg = load_config(args.config)
    if args.output:
        cfg.output = args.output
    outcome = execute(cfg)
    csv = trace_csv(outcome.run) if outcome.run is not None else ""
    summary = format_summary(outcome.summary)
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(csv)
        print(summary)
    else:
        sys.stdout.write(csv)
        print(summary, file=sys.stderr)
    return EXIT_OK


def _parse_grid(text: str) -> list[float]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        grid = [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"gamma_grid: cannot parse {text!r}") from exc
    if not grid:
        raise ConfigError("gamma_grid: empty")
    if any(g <= 0 for g in grid):
        raise ConfigError("gamma_grid: values must be positive")
    return grid


def _cmd_compare(args) -> int:
    from .bench import compare_sinkhorn, compare_table_csv
    from .ot import load_instance

    grid = _parse_grid(args.gamma_grid)
    if not args.eps > 0:
        raise ConfigError("eps: must be positive")
    inst = load_instance(args.instance)
    table = compare_table_csv(compare_sinkhorn(inst, args.eps, grid))
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(table)
    sys.stdout.write(table)
    return EXIT_OK


def _cmd_selftest(args) -> int:
    from .acceptance import CHECKS, run_check

    numbers = [int(v) for v in args.only.split(",")] if args.only else [c[0] for c in CHECKS]
    failed = 0
    for num in numbers:
        try:
            res = run_check(num)
        except KeyError:
            raise ConfigError(f"only: no criterion {num}") from None
        print(res.line(), flush=True)
        failed += not res.ok
    print(f"{len(numbers) - failed}/{len(numbers)} criteria passed")
    return EXIT_OK if failed == 0 else EXIT_SELFTEST


def _cmd_validate(args) -> int:
    from .acceptance import vi_zoo_cases, zoo_cases
    from .models import validate_min_model, validate_vi_model

    cases = [(n, m, s, q, validate_min_model) for n, m, s, q in zoo_cases()]
    cases += [(n, m, s, q, validate_vi_model) for n, m, s, q in vi_zoo_cases()]
    if args.name != "all":
        cases = [c for c in cases if c[0] == args.name]
        if not cases:
            names = ", ".join(n for n, *_ in zoo_cases() + vi_zoo_cases())
            raise ConfigError(f"name: unknown model {args.name!r} (one of: all, {names})")
    bad = 0
    for name, model, setup, Q, check in cases:
        rep = check(model, setup, Q, n_samples=args.samples, rng_seed=args.seed)
        print(f"{name}: {rep.summary()}")
        bad += not rep.passed
    return EXIT_OK if bad == 0 else EXIT_SOLVER


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="imopt", description="Inexact-model first-order solvers")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one solver from a key=value config file")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="trace CSV path (overrides the config)")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("compare-sinkhorn", help="plain vs proximal Sinkhorn sweep counts")
    p.add_argument("instance")
    p.add_argument("--eps", type=float, default=1e-2)
    p.add_argument("--gamma-grid", default="1,0.5,0.1")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.add_argument("--only", help="comma separated criterion numbers")
    p.set_defaults(fn=_cmd_selftest)

    p = sub.add_parser("validate-model", help="sample-check a zoo model against its declared constants")
    p.add_argument("name", nargs="?", default="all")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ImoptError, FloatingPointError, OSError) as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
