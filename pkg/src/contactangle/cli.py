"""Command-line front end.

    contactangle verify SURFACE [--grid N] [--tol T] [--out report.json]
    contactangle torus solve --constraint C [--beta B] [--seed S] [--max-iter K]
                             [--out torus.json] [--circle-csv f.csv]
    contactangle scan --samples N [--out atlas.csv]

SURFACE is a builtin name or a path to a JSON surface descriptor (the output of
``torus solve`` is accepted too).  Exit codes: 0 success, 1 usage / I/O /
schema error, 2 failed identity, 3 nothing evaluable, 4 no convergence,
5 infeasible constraint.
"""

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import jsonfmt
from .catalog import BUILTINS, from_descriptor
from .errors import GeometryError, InfeasibleConstraint, NoConvergence
from .identities import DEFAULT_TOL, run_report
from .tori import CONSTRAINTS, MAX_ITER, circle_sample, family_branches, solve_minimal, write_circle_csv

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_DEGENERATE, EXIT_NO_CONVERGENCE, EXIT_INFEASIBLE = 0, 1, 2, 3, 4, 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which is reserved for failed identities
    def error(self, message):
        raise UsageError(message)


def _emit(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def load_surface(source):
    """Surface from a builtin name or a descriptor file."""
    if source in BUILTINS:
        return from_descriptor({"kind": "builtin", "name": source})
    if not os.path.exists(source):
        raise UsageError(f"{source!r} is neither a builtin ({', '.join(sorted(BUILTINS))}) nor a file")
    with open(source) as fh:
        try:
            desc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed JSON in {source}: {exc}") from None
    if isinstance(desc, dict) and "descriptor" in desc:
        desc = desc["descriptor"]
    try:
        return from_descriptor(desc)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid surface descriptor in {source}: {exc}") from None


def cmd_verify(args):
    if not 8 <= args.grid <= 512:
        raise UsageError("--grid must be in [8, 512]")
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    surface = load_surface(args.surface)
    report = run_report(surface, args.grid, args.tol)
    _emit(jsonfmt.dumps(report.to_dict()), args.out)
    code = report.exit_code()
    if code == EXIT_DEGENERATE:
        print(f"no point evaluable: {report.degeneracy['status']}", file=sys.stderr)
    for r in report.failures:
        print(f"FAIL {r.name}: sup {r.sup!r} >= tol {r.tol!r}", file=sys.stderr)
    return code


def _torus_payload(status, args, torus, measured):
    keys = ("beta", "alpha", "a", "b", "H_max", "circle_residual", "constraint_residual",
            "beta_spread", "alpha_spread", "a_spread", "b_spread", "integer_exponents")
    return {
        "status": status,
        "constraint": args.constraint,
        "beta_target": args.beta,
        "seed": args.seed,
        "descriptor": None if torus is None else torus.descriptor(),
        "measured": None if measured is None else {k: measured[k] for k in keys},
    }


def cmd_torus_solve(args):
    if args.max_iter < 1:
        raise UsageError("--max-iter must be at least 1")
    try:
        torus, measured = solve_minimal(args.constraint, args.beta, seed=args.seed, max_iter=args.max_iter)
        status, code = "converged", EXIT_OK
    except InfeasibleConstraint as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NoConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        torus, measured = exc.best if exc.best is not None else (None, None)
        status, code = "no_convergence", EXIT_NO_CONVERGENCE
    _emit(jsonfmt.dumps(_torus_payload(status, args, torus, measured)), args.out)
    if args.circle_csv and measured is not None:
        write_circle_csv([circle_sample(measured["beta"], measured["a"], measured["b"])], args.circle_csv)
    return code


def scan_rows(samples):
    betas = np.linspace(0.05, np.pi / 2, samples)
    rows = []
    for beta in betas:
        br = family_branches(beta)
        lo, hi = br["a_zero_b"]
        c = np.cos(beta) / (1 + np.sin(beta) ** 2)
        r2 = 2 * np.sin(beta) ** 4 / (1 + np.sin(beta) ** 2) ** 2
        rows.append((beta, c, r2, br["b_zero_a2"], bool(br["b_zero_admissible"]), lo, hi))
    return rows


SCAN_HEADER = ("beta", "center", "radius2", "b_zero_a2", "b_zero_admissible", "a_zero_b_minus",
               "a_zero_b_plus")


def cmd_scan(args):
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_HEADER)
    for row in scan_rows(args.samples):
        w.writerow([str(x).lower() if isinstance(x, bool) else format(float(x), ".17g") for x in row])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="contactangle", description="Contact-angle geometry of surfaces in S^5.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    v = sub.add_parser("verify", help="evaluate all identities on a surface grid")
    v.add_argument("surface", help="builtin name or descriptor JSON path")
    v.add_argument("--grid", type=int, default=32)
    v.add_argument("--tol", type=float, default=DEFAULT_TOL)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("torus", help="homogeneous minimal tori")
    tsub = t.add_subparsers(dest="torus_command", parser_class=_Parser)
    tsub.required = True
    s = tsub.add_parser("solve", help="solve for a minimal torus under a constraint")
    s.add_argument("--constraint", choices=CONSTRAINTS, default="none")
    s.add_argument("--beta", type=float)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-iter", type=int, default=MAX_ITER, help="iteration budget per start")
    s.add_argument("--out")
    s.add_argument("--circle-csv")
    s.set_defaults(func=cmd_torus_solve)

    sc = sub.add_parser("scan", help="tabulate the circle family over beta")
    sc.add_argument("--samples", type=int, default=100)
    sc.add_argument("--out")
    sc.set_defaults(func=cmd_scan)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
