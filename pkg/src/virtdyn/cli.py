"""Command-line driver: ``virtdyn <experiment> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import EXPERIMENTS, config_from_dict, run_experiment
from .mappings import DivergenceError
from .singularity import SearchBudgetError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="virtdyn",
        description=(
            "Run the mapping-matrix comparison experiments and write their "
            "CSV artifacts plus a resolved config.json"
        ),
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument(
        "--config", type=Path, default=None, help="JSON file with config overrides"
    )
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument(
        "--samples",
        type=int,
        default=None,
        help="main sample count (meaning depends on the experiment)",
    )
    parser.add_argument(
        "--gamma", type=float, nargs="+", default=None, help="FD mass-ratio sweep values"
    )
    parser.add_argument(
        "--alpha", type=float, nargs="+", default=None, help="DLS damping sweep values"
    )
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument(
        "--chain", type=str, default=None, help="chain JSON file (default: UR10 preset)"
    )
    parser.add_argument(
        "--targets", type=int, default=None, help="closed-loop: number of targets"
    )
    parser.add_argument(
        "--no-reset-rest",
        action="store_true",
        help=(
            "closed-loop: accumulate virtual velocity across cycles instead of "
            "accelerating from rest each cycle"
        ),
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    data: dict = {}
    if args.config is not None:
        data.update(json.loads(Path(args.config).read_text()))
    if args.seed is not None:
        data["seed"] = args.seed
    if args.samples is not None:
        data["sample_count"] = args.samples
    if args.gamma is not None:
        data["gamma_list"] = args.gamma
    if args.alpha is not None:
        data["alpha_list"] = args.alpha
    if args.out is not None:
        data["output_dir"] = str(args.out)
    if args.chain is not None:
        data["chain_source"] = args.chain
    if args.targets is not None:
        data["targets"] = args.targets
    if args.no_reset_rest:
        data["reset_rest"] = False

    try:
        cfg = config_from_dict(args.experiment, data)
    except (ValueError, TypeError) as exc:
        print(f"virtdyn: invalid configuration: {exc}", file=sys.stderr)
        return 2

    try:
        paths = run_experiment(cfg)
    except (DivergenceError, SearchBudgetError) as exc:
        print(f"virtdyn: {exc}", file=sys.stderr)
        return 2
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
