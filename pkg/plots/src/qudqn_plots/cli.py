"""plots CLI: render one figure kind from benchmark CSVs.

Exit codes match the simulator CLI: 0 success, 2 bad input/schema, 3 I/O.
"""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, EmptyInputError, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots",
                                     description="Render figures from qudqn benchmark CSVs")
    parser.add_argument("--csv", nargs="+", required=True, help="input CSV path(s)")
    parser.add_argument("--kind", required=True, choices=list(KINDS))
    parser.add_argument("--out", required=True, help="output image path (PNG)")
    parser.add_argument("--group-col", default="policy", dest="group_col")
    parser.add_argument("--x-col", default="scenario", dest="x_col")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec_kwargs = dict(csv_paths=tuple(args.csv), kind=args.kind, out_path=args.out,
                       group_column=args.group_col, x_column=args.x_col)
    try:
        out = render(FigureSpec(**spec_kwargs))
    except (SchemaError, EmptyInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
