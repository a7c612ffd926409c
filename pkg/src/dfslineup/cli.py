"""Command-line entry point.

Exit codes: 0 success, 2 input/schema error, 3 infeasible lineup,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline
from .config import RunConfig, load_config, save_config
from .errors import (
    ConfigError,
    DuplicateKeyError,
    EnsembleTrainingError,
    InfeasibleLineupError,
    InsufficientHistoryError,
    NoFeasibleSampleError,
    PositionShortfallError,
    SchemaError,
    TrainingDivergedError,
    WindowRangeError,
    ZeroVarianceError,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4

_INPUT_ERRORS = (
    ConfigError,
    SchemaError,
    DuplicateKeyError,
    InsufficientHistoryError,
    WindowRangeError,
    FileNotFoundError,
    ValueError,
)
_INFEASIBLE_ERRORS = (InfeasibleLineupError, PositionShortfallError, NoFeasibleSampleError)
_NUMERIC_ERRORS = (
    TrainingDivergedError,
    EnsembleTrainingError,
    ZeroVarianceError,
    ArithmeticError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfslineup",
        description=(
            "Forecast weekly fantasy-football points with a model ensemble, "
            "solve the salary-capped lineup exactly, and validate the result "
            "against random and real-world lineup populations."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("config-init", "write a default config file"),
        ("ingest", "build training/prediction windows from the season CSV"),
        ("predict", "train the ensemble and export prediction distributions"),
        ("optimize", "solve per-model lineups and select the modal lineup"),
        ("validate", "compare the lineup against baseline populations"),
        ("report", "render the validation bundle as text"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default="dfslineup.yaml", help="config file path")
        p.add_argument("--output-dir", help="override the configured output directory")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--n-models", type=int, help="override n_models")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "config-init":
            p.add_argument("--force", action="store_true", help="overwrite an existing file")
    return parser


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.output_dir:
        cfg.output_dir = args.output_dir
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.n_models is not None:
        cfg.n_models = args.n_models
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "config-init":
            path = Path(args.config)
            if path.exists() and not args.force:
                raise ConfigError(f"{path} already exists (use --force to overwrite)")
            save_config(RunConfig(), path)
            print(f"wrote {path}")
            return EXIT_OK
        cfg = _load(args)
        if args.command == "ingest":
            pipeline.cmd_ingest(cfg)
        elif args.command == "predict":
            pipeline.cmd_predict(cfg)
        elif args.command == "optimize":
            pipeline.cmd_optimize(cfg)
        elif args.command == "validate":
            pipeline.cmd_validate(cfg)
        elif args.command == "report":
            print(pipeline.cmd_report(cfg), end="")
        return EXIT_OK
    except _INFEASIBLE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
