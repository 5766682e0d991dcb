"""Command line: alereports {boundary,variance,sweep} --input ... --output ..."""

from __future__ import annotations

import argparse
import sys

from .figures import apply_style, plot_boundary, plot_sweep, plot_variance
from .schemas import SchemaError


def _build_parser():
    p = argparse.ArgumentParser(prog="alereports",
                                description="Figure generation from "
                                "simulation CSV outputs")
    p.add_argument("--style-seed", type=int, default=0,
                   help="salts SVG ids; output bytes are a pure function "
                   "of (inputs, seed)")
    sub = p.add_subparsers(dest="command")

    b = sub.add_parser("boundary", help="cluster boundary polyline")
    b.add_argument("--input", required=True, help="trace CSV")
    b.add_argument("--output", required=True, help="PNG/SVG path")
    b.add_argument("--tau", type=float, help="reference-circle log-radius "
                   "(default: estimated from the trace)")
    b.add_argument("--band", type=float, default=0.05)

    v = sub.add_parser("variance", help="mode variances vs the oracle")
    v.add_argument("--input", required=True, action="append",
                   help="report CSV (repeatable; hashes must match)")
    v.add_argument("--oracle", help="optional oracle CSV overlay")
    v.add_argument("--output", required=True)

    s = sub.add_parser("sweep", help="log-log convergence plot")
    s.add_argument("--input", required=True, help="sweep CSV")
    s.add_argument("--metric", default="cap_err")
    s.add_argument("--output", required=True)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command is None:
        _build_parser().print_usage(sys.stderr)
        return 1
    apply_style(args.style_seed)
    try:
        if args.command == "boundary":
            tau = plot_boundary(args.input, args.output, tau=args.tau,
                                band=args.band)
            print(f"{args.output} (tau = {tau:.4f})")
        elif args.command == "variance":
            plot_variance(args.input, args.output, oracle_csv=args.oracle)
            print(args.output)
        else:
            slope = plot_sweep(args.input, args.output, metric=args.metric)
            note = "" if slope is None else f" (slope {slope:.3f})"
            print(f"{args.output}{note}")
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
