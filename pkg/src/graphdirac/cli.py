"""Command-line entry point.

Exit codes: 0 success, 1 validation error (bad flags, bad graph document,
parameter preconditions), 2 solver failure (non-convergence, trivial
solution, failed sweep row), 3 I/O error (unreadable graph, unwritable
output).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import csvio
from .graphs import GraphError, load_graph
from .limits import bounds_report, fit_rate, make_schedule, run_limit_sweep
from .mesh import MeshError, build_mesh
from .nonlinearity import PowerLaw, check_growth_bound, check_hypotheses
from .operators import EigensolverError, assemble_dirac, eigen_extremes
from .solvers import (
    MeshConfig,
    NldeProblem,
    NlsProblem,
    SolverError,
    decay_rate,
    lift_guess,
    solve_nlde,
    solve_nls,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_IO = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_common(p, physics):
    p.add_argument("--graph", required=True, help="graph description file")
    p.add_argument("--h", type=float, default=0.01, help="target mesh step")
    p.add_argument("--L", type=float, default=None, help="half-line truncation length")
    if physics:
        p.add_argument("--tol", type=float, default=1e-10, help="residual tolerance")
        p.add_argument("--max-iter", type=int, default=50, help="Newton iteration cap")
        p.add_argument("--out", default="run", help="output file prefix")


def build_parser():
    parser = _Parser(prog="graphdirac", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve-nls", help="stationary Schroedinger bound state")
    _add_common(p, True)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--p", type=float, default=4.0, help="power-law exponent")

    p = sub.add_parser("solve-nlde", help="stationary Dirac bound state")
    _add_common(p, True)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--p", type=float, default=4.0)

    p = sub.add_parser("spectrum", help="eigenvalues of the discrete Dirac operator")
    _add_common(p, False)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("-k", "--count", type=int, default=4, dest="k")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")

    p = sub.add_parser("limit-sweep", help="nonrelativistic-limit experiment")
    _add_common(p, True)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--p", type=float, default=4.0)
    p.add_argument("--c-list", required=True, help="comma-separated speeds, e.g. 4,8,16,32")

    p = sub.add_parser("check-nonlinearity", help="sampled hypothesis certificate")
    p.add_argument("--p", type=float, required=True, help="power-law exponent")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")

    return parser


def _default_L(args, rate):
    if args.L is not None:
        return args.L
    return float(np.ceil(32.0 / rate / args.h) * args.h)


def _cmd_solve_nls(args):
    graph = load_graph(args.graph)
    if not (args.nu < 0.0):
        raise ValueError("frequency nu must be negative")
    mesh = build_mesh(graph, args.h, _default_L(args, float(np.sqrt(-args.nu))))
    prob = NlsProblem(mesh, PowerLaw(args.p), args.m, args.nu)
    u, report = solve_nls(prob, tol=args.tol, max_iter=args.max_iter)
    csvio.write_solution(u, f"{args.out}_solution.csv")
    csvio.write_report(report, f"{args.out}_report.csv")
    return EXIT_OK if report.converged and not report.trivial_solution else EXIT_SOLVER


def _cmd_solve_nlde(args):
    graph = load_graph(args.graph)
    nu = 2.0 * args.m * (args.omega - args.m * args.c**2)
    if nu >= 0.0:
        raise ValueError("need omega < m*c^2 to seed from the Schroedinger limit")
    mesh = build_mesh(graph, args.h, _default_L(args, decay_rate(args.m, args.c, args.omega)))
    model = PowerLaw(args.p)
    u, rep_nls = solve_nls(NlsProblem(mesh, model, args.m, nu), tol=args.tol, max_iter=args.max_iter)
    if not rep_nls.converged or rep_nls.trivial_solution:
        sys.stderr.write("solver error: the Schroedinger seed solve failed\n")
        return EXIT_SOLVER
    prob = NldeProblem(mesh, model, args.m, args.c, args.omega)
    psi, report = solve_nlde(prob, lift_guess(u, prob), tol=args.tol, max_iter=args.max_iter)
    csvio.write_solution(psi, f"{args.out}_solution.csv")
    csvio.write_report(report, f"{args.out}_report.csv")
    return EXIT_OK if report.converged and not report.trivial_solution else EXIT_SOLVER


def _cmd_spectrum(args):
    graph = load_graph(args.graph)
    mesh = build_mesh(graph, args.h, args.L if args.L is not None else 40.0)
    op = assemble_dirac(mesh, args.m, args.c)
    eig = eigen_extremes(op, args.k)
    if args.out:
        csvio.write_spectrum(eig, args.out)
    else:
        sys.stdout.write(",".join(csvio.SPECTRUM_SCHEMA) + "\n")
        for i in range(eig.k):
            sys.stdout.write(
                f"{i},{csvio.fmt(eig.eigenvalues[i])},{csvio.fmt(eig.residuals[i])}\n"
            )
    return EXIT_OK


def _fit_row(table, column, expected, slope_window, need_r2):
    slope, r2 = fit_rate(table, column)
    ok = slope_window[0] <= slope <= slope_window[1] and r2 >= need_r2
    return [column, slope, r2, expected, ok], ok


def _cmd_limit_sweep(args):
    graph = load_graph(args.graph)
    c_list = [float(tok) for tok in args.c_list.split(",") if tok.strip()]
    schedule = make_schedule(args.m, args.nu, c_list)
    cfg = MeshConfig(h=args.h, L=args.L)
    table = run_limit_sweep(schedule, graph, cfg, PowerLaw(args.p), tol=args.tol,
                            max_iter=args.max_iter)
    csvio.write_table(table, f"{args.out}_table.csv")

    fits = []
    if len(table.rows) >= 3:
        for column in ("v_h1", "v_l2"):
            row, _ = _fit_row(table, column, -1.0, (-1.3, -0.7), 0.98)
            fits.append(row)
        u_err = table.column("u_err_h1")
        slope, r2 = fit_rate(table, "u_err")
        ok = bool(np.all(np.diff(u_err) < 0.0) and u_err[-1] <= 0.05)
        fits.append(["u_err", slope, r2, None, ok])
        rates = table.column("decay_rate_fit")
        expect = table.column("decay_rate_expected")
        ok = bool(np.all(np.abs(rates - expect) <= 0.1 * expect))
        fits.append(["decay_rate", float(rates[-1]), float("nan"), float(expect[-1]), ok])
        fits.append(["uniform_bounds", float("nan"), float("nan"), None,
                     bounds_report(table)["pass"]])
    csvio.write_csv(fits, csvio.FITS_SCHEMA, f"{args.out}_fits.csv")

    for row, step_psi in zip(table.rows, table.solutions):
        csvio.write_solution(step_psi, f"{args.out}_solution_{row.n:03d}.csv")
    if table.partial:
        sys.stderr.write(f"solver error: {table.failure}\n")
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_check_nonlinearity(args):
    model = PowerLaw(args.p)
    report = check_hypotheses(model)
    growth = check_growth_bound(model)
    csvio.write_hypothesis_report(report, args.out or sys.stdout, growth)
    return EXIT_OK if report.all_passed and growth.found else EXIT_SOLVER


_COMMANDS = {
    "solve-nls": _cmd_solve_nls,
    "solve-nlde": _cmd_solve_nlde,
    "spectrum": _cmd_spectrum,
    "limit-sweep": _cmd_limit_sweep,
    "check-nonlinearity": _cmd_check_nonlinearity,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        sys.stderr.write(f"error: {err}\n")
        parser.print_usage(sys.stderr)
        return EXIT_VALIDATION
    except SystemExit as err:  # --help
        return int(err.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (GraphError, MeshError, ValueError) as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_VALIDATION
    except (SolverError, EigensolverError) as err:
        sys.stderr.write(f"solver error: {err}\n")
        return EXIT_SOLVER
    except OSError as err:
        sys.stderr.write(f"i/o error: {err}\n")
        return EXIT_IO


def entry():
    raise SystemExit(main())
