"""The hlb-plot command: render exported portrait JSON and sweep CSV files."""

from __future__ import annotations

import argparse
import sys

from .doc import SchemaError, load_portrait
from .render import render_portrait, render_scaling


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hlb-plot", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    p_pt = sub.add_parser("portrait", help="render a portrait JSON")
    p_pt.add_argument("portrait_json")
    p_pt.add_argument("-o", "--out", required=True)

    p_sc = sub.add_parser("scaling", help="render a sweep CSV + fit JSON")
    p_sc.add_argument("sweep_csv")
    p_sc.add_argument("fit_json")
    p_sc.add_argument("-o", "--out", required=True)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command == "portrait":
            doc = load_portrait(args.portrait_json)
            path = render_portrait(doc, args.out)
        else:
            path = render_scaling(args.sweep_csv, args.fit_json, args.out)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
