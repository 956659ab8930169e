"""Command-line front end.

Exit codes: 0 success, 1 property failure, 2 I/O or parse error,
3 invalid parameters. ``RENYI_DPI_SEED`` supplies the default seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from .campaigns import AUDIT_MODES, CHANNEL_KINDS, falsify, load_config, saturation_audit, write_sweep
from .divergences import AlphaZParams, alpha_z
from .errors import ConfigError, InvalidInputError, InvalidParamsError
from .properties import run_property_suite
from .states import density_from_matrix, load_matrix, positive_from_matrix

EXIT_OK, EXIT_PROPERTY, EXIT_IO, EXIT_PARAMS = 0, 1, 2, 3
SEED_ENV = "RENYI_DPI_SEED"

log = logging.getLogger("renyi_dpi")


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw, 0)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from exc


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from exc


def _dims(text: str) -> tuple:
    try:
        dims = tuple(int(x) for x in text.replace("x", ",").replace(",", " ").split())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a dimension pair: {text!r}") from exc
    if len(dims) != 2:
        raise argparse.ArgumentTypeError(f"expected two dimensions, got {text!r}")
    return dims


def _emit(obj: dict, output) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def format_value(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return f"{round(v, 12) + 0.0:.12f}"


def cmd_divergence(args) -> int:
    rho = density_from_matrix(load_matrix(args.rho))
    sigma = positive_from_matrix(load_matrix(args.sigma), strictly_positive=False)
    if rho.shape != sigma.shape:
        raise InvalidInputError(f"rho is {rho.shape[0]}-dimensional, sigma {sigma.shape[0]}-dimensional")
    value = alpha_z(rho, sigma, AlphaZParams(args.alpha, args.z), strict=not args.permissive)
    print(format_value(value))
    return EXIT_OK


def cmd_gap_sweep(args) -> int:
    cfg = load_config(
        args.config,
        defaults={"seed": default_seed()},
        alpha_grid=args.alpha_grid,
        z_grid=args.z_grid,
        dims=args.dims,
        trials_per_cell=args.trials,
        channel_kind=args.channel_kind,
        seed=args.seed,
        regularization_eps=args.eps,
        output_path=args.output,
    )
    summary = write_sweep(cfg, workers=args.workers)
    log.info("wrote %d rows to %s", summary["rows"], cfg.output_path)
    return EXIT_OK


def cmd_saturation_audit(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    _emit(saturation_audit(args.mode, args.alpha, args.z, args.dims, args.trials, seed), args.output)
    return EXIT_OK


def cmd_falsify(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    _emit(falsify(args.alpha, args.z, args.dims, args.budget, seed).to_json(), args.output)
    return EXIT_OK


def cmd_property_suite(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    if args.trials == 0:
        log.warning("--trials 0: no properties were exercised")
    report = run_property_suite(seed, args.trials, args.dims_max)
    _emit(report, args.output)
    for name in report["failed"]:
        print(f"property failed: {name}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_PROPERTY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="renyi-dpi", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", help="evaluate D_{alpha,z}(rho||sigma)")
    p.add_argument("--rho", required=True, help="matrix JSON file")
    p.add_argument("--sigma", required=True, help="matrix JSON file")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--permissive", action="store_true", help="take negative powers of sigma on its support")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("gap-sweep", help="DPI gaps over an (alpha, z) grid")
    p.add_argument("--config", help="key = value file with sweep settings")
    p.add_argument("--alpha-grid", type=_floats)
    p.add_argument("--z-grid", type=_floats)
    p.add_argument("--dims", type=_dims)
    p.add_argument("--trials", type=int, help="trials per (alpha, z) cell")
    p.add_argument("--channel-kind", choices=CHANNEL_KINDS)
    p.add_argument("--seed", type=int)
    p.add_argument("--eps", type=float, help="depolarizing regularization of the sampled states")
    p.add_argument("--output", help="CSV path; the summary goes to <output>.summary.json")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_gap_sweep)

    p = sub.add_parser("saturation-audit", help="saturation residuals on constructed instances")
    p.add_argument("--mode", choices=AUDIT_MODES, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--dims", type=_dims, default=(2, 2))
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_saturation_audit)

    p = sub.add_parser("falsify", help="search for DPI violations outside the monotone region")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--dims", type=_dims, default=(2, 2))
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_falsify)

    p = sub.add_parser("property-suite", help="run every randomized invariant check")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--dims-max", type=int, default=3)
    p.add_argument("--output")
    p.set_defaults(func=cmd_property_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_IO if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InvalidParamsError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except (InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
