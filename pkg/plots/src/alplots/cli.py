"""Render one figure from a JSON spec: alrom-plots --spec <path>."""

import argparse
import json
import sys

from .figures import FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="alrom-plots", description="Render a figure from pipeline CSVs")
    parser.add_argument("--spec", required=True, help="FigureSpec JSON file")
    args = parser.parse_args(argv)
    try:
        meta = render(FigureSpec.from_file(args.spec))
    except SchemaError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return 2
    print(json.dumps(meta, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
