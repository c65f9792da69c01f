"""`figrender <figure_id> --in DIR --out FILE [--format png|svg]`."""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_IDS, render
from .schemas import SchemaError


def main(argv=None):
    parser = argparse.ArgumentParser(prog="figrender",
                                     description="Render scenario CSVs into figure images")
    parser.add_argument("figure_id", choices=FIGURE_IDS)
    parser.add_argument("--in", dest="in_dir", required=True, help="directory with the CSVs")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    args = parser.parse_args(argv)
    try:
        path = render(args.figure_id, args.in_dir, args.out, fmt=args.format)
    except SchemaError as exc:
        print(f"figrender: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
