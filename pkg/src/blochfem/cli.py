"""Command line: band / solve / validate / sweep.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.  Thread
limits are applied before the numerical stack is imported, so --threads is
honored by the BLAS backends.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import ConfigError, NumericalError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blochfem",
        description="Bloch-enriched FEM for Helmholtz scattering in periodic wave-guides",
    )
    parser.add_argument("--config", help="JSON run configuration (default: built-in first experiment)")
    parser.add_argument("--out", help="output directory (overrides the config)")
    parser.add_argument("--delta", type=float, help="override the damping parameter")
    parser.add_argument("--threads", type=int, default=None, help="BLAS/OpenMP thread cap")
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("band", help="band structure and selected outgoing sets")
    sub.add_parser("solve", help="scattering solve: field CSV + report JSON")
    sub.add_parser("validate", help="reflection/transmission against Fresnel")
    sweep = sub.add_parser("sweep", help="damping sweep of the validation errors")
    sweep.add_argument(
        "--deltas",
        type=float,
        nargs="+",
        help="damping values, positive descending (default 1e-2 .. 1e-6)",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    # imported after the thread environment is pinned
    from . import pipeline, presets
    from .runconfig import RunConfig, load_config

    try:
        if args.config:
            config = load_config(args.config)
        else:
            config = presets.interface_small_omega()
        if args.delta is not None:
            d = config.to_dict()
            d["delta"] = args.delta
            config = RunConfig.from_dict(d)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "band":
            out = pipeline.run_band(config, args.out)
        elif args.command == "solve":
            out = pipeline.run_solve(config, args.out)
        elif args.command == "validate":
            out = pipeline.run_validate(config, args.out)
        elif args.command == "sweep":
            out = pipeline.run_sweep(config, deltas=args.deltas, out_dir=args.out)
        else:  # pragma: no cover - argparse enforces the choices
            raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    for key, value in out.items():
        if isinstance(value, str):
            print(f"{key}: {value}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
