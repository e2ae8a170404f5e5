"""Command line front end: sweep CSV in, one heatmap PNG per mu out."""

from __future__ import annotations

import argparse
import sys

from .render import CsvFormatError, HeatmapSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sweep-heatmaps",
        description="Render phase-diagram heatmaps from a sweep CSV",
    )
    parser.add_argument("csv", help="sweep CSV file")
    parser.add_argument(
        "--out-dir", default=None,
        help="output directory (default: the CSV's directory)",
    )
    parser.add_argument(
        "--value-column", default="success_rate",
        help="column to color by (default: success_rate)",
    )
    parser.add_argument(
        "--total-users", type=int, default=None,
        help="total user count for the panel captions",
    )
    return parser


def cli_main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = HeatmapSpec(
            csv_path=args.csv,
            value_column=args.value_column,
            total_users=args.total_users,
            out_dir=args.out_dir,
        )
        written = render(spec)
    except (CsvFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
