"""Command-line entry point: plot {field,diag,sequence} ..."""

from __future__ import annotations

import argparse
import sys

from .files import SnapshotFormatError
from .render import render_diagnostics, render_field, render_sequence


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="plot",
        description="Render solver snapshot and diagnostics files.")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("field", help="heatmap of one snapshot")
    f.add_argument("meta", help="path to the snapshot .meta file")
    f.add_argument("-o", "--out", required=True, help="output image path")
    f.add_argument("--cmap", default=None)

    d = sub.add_parser("diag", help="diagnostics time series")
    d.add_argument("csv", help="path to diagnostics.csv")
    d.add_argument("-o", "--out", required=True, help="output image path")

    s = sub.add_parser("sequence", help="panel row of one field over time")
    s.add_argument("directory", help="directory holding the snapshots")
    s.add_argument("--field", default="vorticity")
    s.add_argument("-o", "--out", required=True,
                   help="output directory for sequence_<field>.png")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "field":
            out = render_field(args.meta, args.out, cmap=args.cmap)
        elif args.command == "diag":
            out = render_diagnostics(args.csv, args.out)
        else:
            out = render_sequence(args.directory, args.field, args.out)
    except (SnapshotFormatError, FileNotFoundError, KeyError) as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
