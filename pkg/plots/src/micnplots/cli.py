"""CLI: micnplot <kind> <inputs...> -o <file> [--nodes a,b]"""

from __future__ import annotations

import argparse
import sys

from .figures import RENDERERS, SchemaError, render, save


def build_parser():
    parser = argparse.ArgumentParser(
        prog="micnplot",
        description="Render figures from simulator trace/summary/sweep CSVs.")
    parser.add_argument("kind", choices=sorted(RENDERERS))
    parser.add_argument("inputs", nargs="+", help="input CSV file(s)")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    parser.add_argument("--nodes", help="comma-separated node filter (rank/traffic)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    kwargs = {}
    if args.nodes and args.kind in ("rank", "traffic"):
        kwargs["nodes"] = set(args.nodes.split(","))
    try:
        fig = render(args.kind, args.inputs, **kwargs)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    save(fig, args.output)
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
