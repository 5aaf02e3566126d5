"""Command-line front end: ``bismutkit <command> ...``.

Exit status: 0 every check passed, 1 some check failed, 2 bad input,
3 numerical abort.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import InputError, NumericalAbort
from .models import MODELS
from .report import JobSpec, parse_window, run_job

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

COMMANDS = {
    "verify": "verify-model",
    "gk": "gk-check",
    "lie": "lie-algebra",
    "cohomology": "cohomology",
    "borel": "borel-e2",
    "sphere-integral": "sphere-integral",
}


def _tolerance(text: str):
    name, sep, val = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip().upper(), float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance for {name} is not a number: {val!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--points", type=int, default=None,
                        help="number of sampled points (per-command default)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=_tolerance, action="append", default=[], metavar="NAME=VAL",
                        help="override the threshold of one check")
    common.add_argument("--out", type=Path, help="write the JSON report here instead of stdout")
    common.add_argument("--expect-fail", action="append", default=[], metavar="CHECK",
                        help="declare a check that should fail (a pass is then an anomaly)")

    parser = argparse.ArgumentParser(prog="bismutkit", description=__doc__.splitlines()[0])
    parser.add_argument("--list-models", action="store_true", help="print the model names and exit")
    sub = parser.add_subparsers(dest="command")
    for cmd, arg, helptext in (
        ("verify", "model", "Hermitian condition checks on a model"),
        ("gk", "model", "generalized Kahler check on a model pair"),
        ("lie", "file", "exact checks on a Lie algebra file"),
        ("cohomology", "file", "mapping torus cohomology job"),
        ("borel", "file", "Borel spectral sequence E2 table"),
    ):
        p = sub.add_parser(cmd, parents=[common], help=helptext)
        p.add_argument(arg)
        if cmd == "borel":
            p.add_argument("--window", default="0..4,0..4", help="p0..p1,q0..q1")
    sub.add_parser("sphere-integral", parents=[common], help="integral of H over embedded 3-spheres")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_models:
        for name, spec in sorted(MODELS.items()):
            print(f"{name}\t{spec.description}")
        return EXIT_PASS
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_INPUT
    try:
        spec = JobSpec(
            kind=COMMANDS[args.command],
            target=getattr(args, "model", None) or getattr(args, "file", None),
            points=args.points,
            seed=args.seed,
            tolerances=dict(args.tol),
            window=parse_window(args.window) if args.command == "borel" else None,
            expect_fail=tuple(name.upper() for name in args.expect_fail),
        )
        report = run_job(spec)
    except NumericalAbort as exc:
        print(f"bismutkit: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InputError as exc:
        print(f"bismutkit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = report.to_json() + "\n"
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
