"""Deterministic CSV output and solution-file round-tripping.

Reals are written with 17 significant digits ('.' decimal separator) so a
double round-trips losslessly; rows follow fixed orders (declaration order of
edges, ascending node index), lines end with LF, and the header row is always
present.  Solution files carry one row per integer node: (edge_id, x, u, w)
where w holds the half-node sample at x + h/2 (blank on the last row of each
edge and for scalar fields).
"""

from __future__ import annotations

import numpy as np

from .functions import GraphFunction, SpinorFunction


def fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _escape(cell):
    if any(ch in cell for ch in (',', '"', "\n")):
        return '"' + cell.replace('"', '""') + '"'
    return cell


def write_csv(rows, schema, path):
    """Write rows (sequences matching schema) as an RFC-4180-style CSV."""
    lines = [",".join(_escape(str(col)) for col in schema)]
    for row in rows:
        if len(row) != len(schema):
            raise ValueError(f"row of width {len(row)} does not match schema {schema}")
        lines.append(",".join(_escape(fmt(cell)) for cell in row))
    data = ("\n".join(lines) + "\n").encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(data)


def read_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        import csv as _csv

        reader = _csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    return rows[0], rows[1:]


SOLUTION_SCHEMA = ("edge_id", "x", "u", "w")


def solution_rows(f):
    """Canonical row stream for a GraphFunction or SpinorFunction."""
    mesh = f.mesh
    is_spinor = isinstance(f, SpinorFunction)
    u = f.u.values if is_spinor else f.values
    for em in mesh.edges:
        x = em.node_x()
        for j in range(em.n + 1):
            w_val = None
            if is_spinor and j < em.n:
                w_val = f.w[em.w_start + j]
            yield (em.edge_id, x[j], u[em.u_idx[j]], w_val)


def write_solution(f, path):
    write_csv(solution_rows(f), SOLUTION_SCHEMA, path)


def read_solution(path, mesh):
    """Rebuild a function from a solution CSV written on the same mesh."""
    header, rows = read_csv(path)
    if tuple(header) != SOLUTION_SCHEMA:
        raise ValueError(f"{path}: unexpected solution header {header}")
    u = np.zeros(mesh.n_u)
    w = np.zeros(mesh.n_w)
    has_w = False
    i = 0
    for em in mesh.edges:
        x = em.node_x()
        for j in range(em.n + 1):
            if i >= len(rows):
                raise ValueError(f"{path}: truncated solution file")
            edge_id, xs, us, ws = rows[i]
            i += 1
            if edge_id != em.edge_id or abs(float(xs) - x[j]) > 1e-9 * (1.0 + x[j]):
                raise ValueError(f"{path}: row {i} does not match the mesh layout")
            u[em.u_idx[j]] = float(us)
            if ws != "":
                has_w = True
                if j >= em.n:
                    raise ValueError(f"{path}: half-node sample on a terminal row")
                w[em.w_start + j] = float(ws)
    if i != len(rows):
        raise ValueError(f"{path}: {len(rows) - i} trailing rows")
    gf = GraphFunction(mesh, u)
    return SpinorFunction(gf, w) if has_w else gf


def report_rows(report, extra=()):
    rows = [
        ("converged", report.converged),
        ("iterations", report.iterations),
        ("residual", report.residual),
        ("boundary_magnitude", report.boundary_magnitude),
        ("boundary_fraction", report.boundary_fraction),
        ("trivial_solution", report.trivial_solution),
        ("min_damping", min(report.damping_history) if report.damping_history else 1.0),
        ("notes", "; ".join(report.notes)),
    ]
    rows.extend(extra)
    return rows


def write_report(report, path, extra=()):
    write_csv(report_rows(report, extra), ("field", "value"), path)


SPECTRUM_SCHEMA = ("index", "eigenvalue", "residual")


def write_spectrum(eig, path):
    rows = [(i, eig.eigenvalues[i], eig.residuals[i]) for i in range(eig.k)]
    write_csv(rows, SPECTRUM_SCHEMA, path)


TABLE_SCHEMA = (
    "n",
    "c",
    "omega",
    "a",
    "b",
    "v_l2",
    "v_h1",
    "u_err_h1",
    "psi_linf",
    "psi_h1",
    "psi_l4",
    "decay_rate_fit",
    "decay_rate_expected",
    "residual",
    "truncation_L",
)


def write_table(table, path):
    rows = [tuple(getattr(r, k) for k in TABLE_SCHEMA) for r in table.rows]
    write_csv(rows, TABLE_SCHEMA, path)


FITS_SCHEMA = ("quantity", "slope", "r2", "expected", "pass")


HYPOTHESIS_SCHEMA = ("hypothesis", "pass", "witness_s", "detail")


def hypothesis_rows(report, growth=None):
    rows = [
        (c.name, c.passed, None if np.isnan(c.witness) else c.witness, c.detail)
        for c in report.checks
    ]
    if growth is not None:
        witness = None if np.isnan(growth.witness) else growth.witness
        detail = growth.detail or f"constant C = {fmt(growth.constant)}"
        rows.append(("growth_bound", growth.found, witness, detail))
    return rows


def write_hypothesis_report(report, path_or_stream, growth=None):
    rows = hypothesis_rows(report, growth)
    if hasattr(path_or_stream, "write"):
        lines = [",".join(HYPOTHESIS_SCHEMA)]
        lines += [",".join(_escape(fmt(col)) for col in row) for row in rows]
        path_or_stream.write("\n".join(lines) + "\n")
    else:
        write_csv(rows, HYPOTHESIS_SCHEMA, path_or_stream)
