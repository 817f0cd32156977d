"""Command-line front end: one figure per invocation."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, SchemaMismatch, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nematicon-plot",
        description="Regenerate publication-style figures from solver artifacts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fig1 = sub.add_parser("iterates", help="two-panel u/rho figure with dashed iterates")
    fig1.add_argument("run_dir", help="solve run directory (run.json, u.csv, iterates/)")
    fig1.add_argument("--out", required=True, help="output image path (.png base)")
    fig1.add_argument("--title", default="")

    fam = sub.add_parser("family", help="overlay final profiles from several runs")
    fam.add_argument("profiles", nargs="+", help="profile CSV files")
    fam.add_argument("--labels", help="comma-separated legend labels")
    fam.add_argument("--out", required=True)
    fam.add_argument("--title", default="")

    mass = sub.add_parser("mass-curve", help="log-log mass vs multiplier gap (+zoom)")
    mass.add_argument("sweep_csv")
    mass.add_argument("manifest")
    mass.add_argument("--out", required=True)
    mass.add_argument("--title", default="")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        if args.command == "iterates":
            spec = FigureSpec(
                "profiles_with_iterates", (args.run_dir,), args.out, title=args.title
            )
        elif args.command == "family":
            labels = tuple(args.labels.split(",")) if args.labels else ()
            spec = FigureSpec(
                "profile_family", tuple(args.profiles), args.out,
                labels=labels, title=args.title,
            )
        else:
            spec = FigureSpec(
                "loglog_mass", (args.sweep_csv, args.manifest), args.out,
                title=args.title,
            )
        for path in render(spec):
            print(path)
        return 0
    except (SchemaMismatch, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
