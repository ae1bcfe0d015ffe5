"""figplots command line: render sweep CSVs into certified figures."""

from __future__ import annotations

import argparse
import sys

from .render import BandCheckError, CsvFormatError, PlotSpec, render_figure


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figplots", description="Render variance-sweep CSV files"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    render = sub.add_parser("render", help="render one CSV into an image")
    render.add_argument("--csv", required=True, help="input sweep CSV")
    render.add_argument("--out", required=True, help="output image path")
    render.add_argument("--title", default="", help="figure title")
    render.add_argument("--second-order", action="store_true",
                        help="also draw the second-order prediction")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    spec = PlotSpec(
        csv_path=args.csv,
        out_path=args.out,
        title=args.title,
        show_second_order=args.second_order,
    )
    try:
        summary = render_figure(spec)
    except (CsvFormatError, BandCheckError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    side = {1: "above", -1: "below", 0: "on"}[summary["side"]]
    print(
        f"wrote {args.out}: {summary['in_band']}/{summary['rows']} rows in band, "
        f"prediction {side} the sigma^2 reference"
    )
    return 0


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
