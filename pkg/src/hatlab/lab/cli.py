"""Command-line entry point: ``hatlab <experiment> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import EXPERIMENTS, SCHEMAS, ConfigError, ExperimentConfig, load_config_file
from .experiments import EXIT_ERROR, run_experiment, threads_from_env


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hatlab", description="Harmonic activation and transport experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON file with experiment settings")
        p.add_argument("--n", type=int, help="number of particles")
        p.add_argument("--seed", type=int, help="64-bit master seed")
        p.add_argument("--threads", type=int, help="worker processes (falls back to HATLAB_THREADS)")
        p.add_argument("--out", help="output path prefix")
        p.add_argument("--format", choices=("csv", "json"), help="tabular output format")
        p.add_argument("-v", "--verbose", action="store_true")
        for key, (_, _, _, desc) in SCHEMAS[name].items():
            p.add_argument(f"--{key.replace('_', '-')}", dest=f"param_{key}", help=desc)
    return parser


def config_from_args(args) -> ExperimentConfig:
    base = load_config_file(args.config) if args.config else {}
    params = dict(base.get("parameters", {}))
    for key in SCHEMAS[args.experiment]:
        val = getattr(args, f"param_{key}")
        if val is not None:
            params[key] = val
    threads = args.threads if args.threads is not None else base.get("threads", threads_from_env())
    return ExperimentConfig(
        experiment=args.experiment,
        n=args.n if args.n is not None else base.get("n", 3),
        parameters=params,
        seed=args.seed if args.seed is not None else base.get("seed", 0),
        output=args.out or base.get("output", f"out/{args.experiment}"),
        format=args.format or base.get("format", "csv"),
        threads=threads,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return run_experiment(config_from_args(args))
    except ConfigError as exc:
        print(f"hatlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # report and map to the error exit status
        logging.getLogger("hatlab").debug("failure", exc_info=True)
        print(f"hatlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
