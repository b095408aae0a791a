"""Command line wrapper: render one CSV to one image.

Two invocation forms, mirroring how the specs are produced: a JSON
PlotSpec file for custom bindings, or a CSV plus a preset name for the
known sweep layouts. Exit code 0 on success, 1 for any schema or I/O
problem.
"""

from __future__ import annotations

import argparse
import sys

from .presets import PRESET_NAMES, preset_spec
from .spec import PlotSpec, SchemaError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise SchemaError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="starcf-plot",
        description="Render a sweep CSV to a line plot.",
    )
    parser.add_argument("csv", nargs="?", metavar="CSV",
                        help="input CSV (with a preset name)")
    parser.add_argument("preset", nargs="?", metavar="PRESET",
                        help=f"CSV layout: {', '.join(PRESET_NAMES)}")
    parser.add_argument("--spec", metavar="PATH",
                        help="JSON PlotSpec file (instead of CSV + preset)")
    parser.add_argument("--out", metavar="PATH",
                        help="output image (default: CSV path with .png)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.spec is not None:
            if args.csv is not None or args.preset is not None:
                raise SchemaError(
                    "--spec replaces the CSV and preset arguments"
                )
            spec = PlotSpec.from_json(args.spec)
            if args.out is not None:
                raise SchemaError("--out applies to presets; set out_path "
                                  "in the spec file instead")
        else:
            if args.csv is None or args.preset is None:
                raise SchemaError(
                    "either --spec PATH or both CSV and PRESET are required"
                )
            spec = preset_spec(args.preset, args.csv, args.out)

        from .render import render

        result = render(spec)
        print(result.out_path)
        return 0
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
