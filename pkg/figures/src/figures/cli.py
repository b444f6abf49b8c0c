"""Figure tool entry point: figures <kind> --in <csv> [--out <path>] [--db] [--no-ci]."""

import argparse
import sys
from pathlib import Path

from .render import KINDS, FigureError, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render trisradar CSV exports into publication-style figures.")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="input_path", required=True,
                        help="path to the exported CSV")
    parser.add_argument("--out", default=None,
                        help="output image path (default: input with .png)")
    parser.add_argument("--db", action="store_true",
                        help="beampattern only: plot the dB column")
    parser.add_argument("--no-ci", action="store_true",
                        help="suppress confidence bands on P_D charts")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(kind=args.kind, input_path=Path(args.input_path),
                      out_path=Path(args.out) if args.out else None,
                      db_scale=args.db, ci_bands=not args.no_ci)
    try:
        out = render(spec)
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
