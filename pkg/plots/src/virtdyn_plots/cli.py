"""Command-line driver: ``plots <figure-kind> --in DIR --out DIR``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FIGURE_KINDS, SchemaError, jobs_for_directory, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render virtdyn experiment CSV artifacts into figures",
    )
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument(
        "--in", dest="in_dir", type=Path, required=True, help="directory with the CSV artifacts"
    )
    parser.add_argument(
        "--out", dest="out_dir", type=Path, required=True, help="directory for the image"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = jobs_for_directory(args.kind, args.in_dir, args.out_dir)
        path = render(job)
    except SchemaError as exc:
        print(f"plots: schema error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
