"""Command-line front end: ``adjchar {identities,trace,verify,stripe-demo,convert}``.

Exit codes: 0 pass, 1 verification failure, 2 domain or geometry error,
3 physics precondition error, 4 I/O, format or usage error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .analytic import (DEMO_BBOX, DEMO_TRACE_LENGTH, StripeField, demo_starts, emit_stripe_grid,
                       gamma_along)
from .compat import KINDS, k_integrals, write_report
from .errors import AdjcharError, FamilyMismatch, IoError
from .field import convert_csv, load_field
from .identities import DEFAULT_TOL, run_suite
from .tracer import TraceConfig, trace, write_curve_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 4
FAMILY_NAMES = {"s": "S", "cplus": "Cplus", "cminus": "Cminus"}
KIND_NAMES = {k.lower(): k for k in KINDS}
FAMILY_OF_KIND = {"S1": "S", "S2": "S", "Cplus": "Cplus", "Cminus": "Cminus"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _pair(text):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}") from None
    return x, y


def _clip(text):
    try:
        cx, cy, r = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected CX,CY,R, got {text!r}") from None
    return cx, cy, r


def _add_trace_args(p, with_family=True):
    p.add_argument("--field", required=True, type=Path, help="ADJCHAR-FIELD file")
    p.add_argument("--start", required=True, type=_pair, metavar="X,Y")
    if with_family:
        p.add_argument("--family", choices=sorted(FAMILY_NAMES), required=True)
    p.add_argument("--step", type=float, default=1.0 / 512, metavar="H")
    p.add_argument("--max-length", type=float, default=1.0, metavar="L")
    p.add_argument("--clip", type=_clip, metavar="CX,CY,R", help="restrict the curve to a disk")
    p.add_argument("--sense", choices=("against_flow", "with_flow"), default="against_flow")
    p.add_argument("--shock-threshold", type=float, default=0.1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adjchar", description="Adjoint Euler characteristic ODE checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("identities", help="random-state coefficient identity suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    p = sub.add_parser("trace", help="trace one curve and write its CSV")
    _add_trace_args(p)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("verify", help="trace, integrate K and report")
    _add_trace_args(p, with_family=False)
    p.add_argument("--kind", choices=sorted(KIND_NAMES), required=True)
    p.add_argument("--family", choices=sorted(FAMILY_NAMES), help="must agree with --kind if given")
    p.add_argument("--out", type=Path, help="report CSV")
    p.add_argument("--curve-out", type=Path, help="curve CSV")
    p.add_argument("--tol", type=float, default=0.02, help="pass threshold on |K| / max |subpart|")

    p = sub.add_parser("stripe-demo", help="emit a stripe fixture and Gamma reports")
    p.add_argument("--mach", type=float, default=2.0)
    p.add_argument("--alpha", type=float, default=0.0, help="flow angle in degrees")
    p.add_argument("--grid", type=int, default=257, metavar="N", help="N x N nodes")
    p.add_argument("--step", type=float, default=None, metavar="H")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--tol", type=float, default=1e-8, help="pass threshold on Gamma spread")

    p = sub.add_parser("convert", help="column CSV to ADJCHAR-FIELD")
    p.add_argument("csv", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--ni", type=int)
    p.add_argument("--nj", type=int)
    p.add_argument("--gamma", type=float, default=1.4)
    p.add_argument("--periodic", action="store_true", help="O-mesh wrap in i")
    return parser


def _config(args) -> TraceConfig:
    try:
        return TraceConfig(args.step, args.max_length, args.clip, args.sense, args.shock_threshold)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_identities(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    results = run_suite(args.samples, args.seed, args.tol, args.inject_fault)
    for r in results:
        print(f"{r.name:14s} max_rel_err={r.max_rel_error:.3e}  {'ok' if r.passed else 'FAIL'}  {r.description}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failed identities: " + ", ".join(failed))
        return EXIT_FAIL
    print(f"all {len(results)} identities within {args.tol:g} over {args.samples} samples")
    return EXIT_OK


def cmd_trace(args) -> int:
    cfg = _config(args)
    grid = load_field(args.field)
    curve = trace(grid, args.start, FAMILY_NAMES[args.family], cfg)
    _write(write_curve_csv, curve, args.out)
    x, y, s = curve.points[-1]
    print(f"{curve.family}: {len(curve)} points, s_end={s:.6g}, end=({x:.6g}, {y:.6g}), "
          f"termination={curve.termination.value}")
    return EXIT_OK


def cmd_verify(args) -> int:
    kind = KIND_NAMES[args.kind]
    family = FAMILY_OF_KIND[kind]
    if args.family is not None and FAMILY_NAMES[args.family] != family:
        raise FamilyMismatch(f"kind {kind} needs family {family}, got {FAMILY_NAMES[args.family]}")
    cfg = _config(args)
    grid = load_field(args.field)
    curve = trace(grid, args.start, family, cfg)
    report = k_integrals(curve, kind)
    if args.out is not None:
        _write(write_report, report, args.out)
    if args.curve_out is not None:
        _write(write_curve_csv, curve, args.curve_out)
    subs = " ".join("%.6e" % v for v in report.subpart_totals)
    print(f"{kind} on {family}: {len(curve)} points, termination={curve.termination.value}")
    print(f"K_total={report.K_total:.6e} subparts=[{subs}]")
    ok = report.ratio <= args.tol
    print(f"ratio={report.ratio:.3e} threshold={args.tol:g} {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_stripe_demo(args) -> int:
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    sf = StripeField.demo(args.mach, math.radians(args.alpha))
    out = args.out
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out}: {exc}") from exc
    grid = emit_stripe_grid(sf, DEMO_BBOX, args.grid, args.grid, out / "stripe_field.txt")
    spacing = (DEMO_BBOX[1] - DEMO_BBOX[0]) / (args.grid - 1)
    cfg = TraceConfig(args.step or spacing, DEMO_TRACE_LENGTH)
    own = {"S": ("S1", "S2"), "Cplus": ("Cplus",), "Cminus": ("Cminus",)}
    ok = True
    for family, start in demo_starts(sf).items():
        g = gamma_along(trace(grid, start, family, cfg))
        cols = np.column_stack([g.s] + [g.values(n) for n in ("S1", "S2", "Cplus", "Cminus")])
        _write(_write_gamma_csv, cols, out / f"gamma_{family}.csv")
        for name in own[family]:
            spread = g.relative_spread(name)
            ok &= spread <= args.tol
            print(f"{family:6s} Gamma_{name:6s} relative spread={spread:.3e}")
    print(f"fixture written to {out / 'stripe_field.txt'}")
    return EXIT_OK if ok else EXIT_FAIL


def _write_gamma_csv(cols, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("s,gamma_s1,gamma_s2,gamma_cplus,gamma_cminus\n")
        for row in cols.tolist():
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def _write(fn, obj, path):
    try:
        fn(obj, path)
    except IoError:
        raise
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def cmd_convert(args) -> int:
    grid = convert_csv(args.csv, args.out, args.ni, args.nj, args.gamma, args.periodic)
    print(f"wrote {grid.ni} x {grid.nj} grid to {args.out}")
    return EXIT_OK


COMMANDS = {
    "identities": cmd_identities,
    "trace": cmd_trace,
    "verify": cmd_verify,
    "stripe-demo": cmd_stripe_demo,
    "convert": cmd_convert,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=sys.stderr)
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AdjcharError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
