"""Command-line entry point: ``plot --spec <path>``."""

import argparse
import sys

from plotviz.errors import PlotvizError
from plotviz.render import render
from plotviz.spec import spec_from_file


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render figures from sweep result CSVs.")
    parser.add_argument("--spec", required=True,
                        help="path to a JSON plot specification")
    args = parser.parse_args(argv)
    try:
        render(spec_from_file(args.spec))
    except (PlotvizError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
