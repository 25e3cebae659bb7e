"""Command-line figure rendering: trajectories, convergence, comparison."""

from __future__ import annotations

import argparse
import sys
from importlib import resources

from .figures import FORMATS, plot_comparison, plot_convergence, plot_trajectories
from .io import SchemaError


def sample_path(name: str):
    """Filesystem path of a data file shipped with the package."""
    return resources.files("plotkit").joinpath("data", name)


def _parse_goal(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("goal must be X,Y in metres")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def cmd_trajectories(args) -> int:
    out = plot_trajectories(args.input, args.out, fmt=args.format, goal=args.goal)
    print(f"wrote {out}")
    return 0


def cmd_convergence(args) -> int:
    out = plot_convergence(args.input, args.out, fmt=args.format,
                           window=args.window)
    print(f"wrote {out}")
    return 0


def cmd_comparison(args) -> int:
    out = plot_comparison(args.input, args.out, fmt=args.format)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render figures from exported run artifacts")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("input", help="input artifact path")
        p.add_argument("--out", required=True, help="output image path")
        p.add_argument("--format", choices=FORMATS, default=None,
                       help="image format (default: from --out suffix, else png)")

    p = sub.add_parser("trajectories",
                       help="flight paths colored by serving network")
    common(p)
    p.add_argument("--goal", type=_parse_goal, default=None,
                   help="mark the goal position, as X,Y in metres")
    p.set_defaults(fn=cmd_trajectories)

    p = sub.add_parser("convergence", help="training return curves")
    common(p)
    p.add_argument("--window", type=int, default=30,
                   help="rolling-mean window in episodes")
    p.set_defaults(fn=cmd_convergence)

    p = sub.add_parser("comparison", help="grouped metric bars per policy")
    common(p)
    p.set_defaults(fn=cmd_comparison)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
