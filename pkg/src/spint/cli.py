"""Command-line entry point.

Subcommands map one-to-one onto library operations:

    spint validate-config CFG.json      check and echo a config
    spint simulate --config CFG.json    integrate and emit states/drift CSVs
    spint drift --config CFG.json       same, but requires tracked functionals
    spint order --config CFG.json       coupled-path strong-order study
    spint modified-coeffs ...           modified-equation coefficient table
    spint poisson-check ...             Poisson-map defect over random samples
    spint reproduce fig1|fig2|fig3      canned long-term conservation studies

Failures print a machine-readable JSON object on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .brownian import SeedSpec, sample_increments
from .diagnostics import poisson_map_residual
from .emit import write_csv
from .errors import ConfigError, ConsistencyError, ConvergenceError, DomainError, \
    EstimationError
from .harness import default_output_dir, load_config, reproduce, run, run_order_study
from .integrators import make_stepper
from .modified import method_coefficients, modified_coefficients_matching
from .systems import make_system, sample_domain_points

__all__ = ["main"]


def _fail(error: Exception, kind: str) -> int:
    payload = {"error": kind, "message": str(error)}
    key = getattr(error, "key", None)
    if key is not None:
        payload["key"] = key
    json.dump(payload, sys.stderr)
    sys.stderr.write("\n")
    return 1


def _parse_floats(text: str):
    return tuple(float(v) for v in text.split(","))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spint",
        description="structure-preserving integration of stochastic Poisson systems")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-config", help="check a config and echo it")
    p.add_argument("config", type=Path)

    for name, blurb in (("simulate", "integrate and emit artifacts"),
                        ("drift", "drift study (requires tracked functionals)"),
                        ("order", "coupled-path strong-order study")):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--config", type=Path, required=True)
        p.add_argument("--output", type=Path, default=None,
                       help="override the config's output directory")

    p = sub.add_parser("modified-coeffs",
                       help="emit the modified-equation coefficient table")
    p.add_argument("--system", required=True)
    p.add_argument("--stepper", required=True)
    p.add_argument("--weight", type=int, default=4)
    p.add_argument("--point", type=_parse_floats, required=True,
                   help="comma-separated base point, e.g. 1,2,3")
    p.add_argument("--sigma", type=_parse_floats, default=None)
    p.add_argument("--output", type=Path, default=None)

    p = sub.add_parser("poisson-check",
                       help="max Poisson-map defect over random samples")
    p.add_argument("--system", required=True)
    p.add_argument("--stepper", required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--h", type=float, default=0.1)
    p.add_argument("--sigma", type=_parse_floats, default=None)
    p.add_argument("--seed", type=int, default=12345)

    p = sub.add_parser("reproduce", help="run a canned conservation study")
    p.add_argument("figure", choices=("fig1", "fig2", "fig3"))
    p.add_argument("--output", type=Path, default=None)
    return parser


def _cmd_validate(args) -> int:
    config = load_config(args.config)
    json.dump(config.as_dict(), sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def _cmd_run(args, require_tracks: bool) -> int:
    config = load_config(args.config)
    if require_tracks and not config.tracks:
        raise ConfigError("drift study needs at least one tracked functional",
                          key="tracks")
    bundle = run(config, out_dir=args.output)
    for path in bundle.all_paths:
        print(path)
    return 0


def _cmd_order(args) -> int:
    config = load_config(args.config)
    if len(config.h_values) < 2:
        raise ConfigError("order study needs at least two step sizes", key="h")
    bundle, estimate = run_order_study(config, out_dir=args.output)
    print(f"strong-order slope: {estimate.slope:.4f} over "
          f"{len(estimate.h_values)} step sizes, {estimate.n_paths} paths")
    for path in bundle.all_paths:
        print(path)
    return 0


def _cmd_modified_coeffs(args) -> int:
    sys_obj = make_system(args.system, sigma=args.sigma)
    stepper = make_stepper(args.stepper)
    point = np.asarray(args.point, dtype=float)
    if len(point) != sys_obj.d:
        raise ConfigError(f"system {args.system!r} needs a {sys_obj.d}-dimensional "
                          f"point, got {len(point)}", key="point")
    table = method_coefficients(stepper, sys_obj, point, args.weight)
    fld = modified_coefficients_matching(table, sys_obj)
    out = args.output if args.output is not None else default_output_dir()
    rows = []
    for alpha, vec in fld.table.entries.items():
        for component, value in enumerate(vec):
            rows.append(tuple(str(e) for e in alpha.entries) + (str(component), value))
    header = [f"alpha_{i}" for i in range(sys_obj.m + 1)] + ["component", "value"]
    path = write_csv(Path(out) / f"modified_coeffs_{args.system}_{args.stepper}.csv",
                     header, rows)
    print(path)
    return 0


def _cmd_poisson_check(args) -> int:
    sys_obj = make_system(args.system, sigma=args.sigma)
    stepper = make_stepper(args.stepper)
    points = sample_domain_points(sys_obj, args.samples, seed=args.seed)
    rng_batch = sample_increments(SeedSpec(args.seed, 1), args.h, sys_obj.m,
                                  args.samples)
    worst = 0.0
    for i in range(args.samples):
        h_i = args.h * (0.1 + 0.9 * (i + 1) / args.samples)
        dw_i = rng_batch.dw[i] * np.sqrt(h_i / args.h)
        worst = max(worst, poisson_map_residual(stepper, sys_obj, points[i], h_i, dw_i))
    print(f"poisson-map max residual over {args.samples} samples "
          f"(h <= {args.h:g}): {worst:.6e}")
    return 0


def _cmd_reproduce(args) -> int:
    bundle = reproduce(args.figure, out_dir=args.output)
    for path in bundle.all_paths:
        print(path)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate-config":
            return _cmd_validate(args)
        if args.command == "simulate":
            return _cmd_run(args, require_tracks=False)
        if args.command == "drift":
            return _cmd_run(args, require_tracks=True)
        if args.command == "order":
            return _cmd_order(args)
        if args.command == "modified-coeffs":
            return _cmd_modified_coeffs(args)
        if args.command == "poisson-check":
            return _cmd_poisson_check(args)
        if args.command == "reproduce":
            return _cmd_reproduce(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ConsistencyError, ConvergenceError, DomainError,
            EstimationError, KeyError, OSError, ValueError) as exc:
        return _fail(exc, type(exc).__name__)


if __name__ == "__main__":
    sys.exit(main())
