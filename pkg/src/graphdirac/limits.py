"""Nonrelativistic-limit experiments: schedules, sweeps, rate and decay fits.

The default schedule takes omega_n = m c_n^2 + nu/(2m), the simplest family
with the frequency offset held exactly at its limit, so the derived
coefficients satisfy b_n - 2m = nu/(2 m c_n^2) and a_n = -nu (1 + nu/(4 m^2
c_n^2)) identically and increase monotonically to their limits 2m and -nu.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .functions import norm, w_component_norm
from .mesh import build_mesh
from .solvers import (
    ContinuationError,
    MeshConfig,
    NlsProblem,
    continuation_solve,
    decay_rate,
    solve_nls,
    transfer_graph_function,
)


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class LimitSchedule:
    """Parameter family (c_n, omega_n) with the derived coefficients a_n, b_n."""

    m: float
    nu: float
    c: tuple
    omega: tuple
    a: tuple
    b: tuple

    def __len__(self):
        return len(self.c)

    def rows(self):
        return list(zip(self.c, self.omega, self.a, self.b))


def _derived(m, c, omega):
    b = (m * c**2 + omega) / c**2
    a = (m * c**2 - omega) * b
    return a, b


def make_schedule(m, nu, c_list):
    """Default schedule omega_n = m c_n^2 + nu/(2m) over increasing speeds."""
    if not (m > 0.0):
        raise ScheduleError("mass must be positive")
    if not (nu < 0.0):
        raise ScheduleError("frequency nu must be negative")
    c_arr = [float(c) for c in c_list]
    if any(c2 <= c1 for c1, c2 in zip(c_arr, c_arr[1:])):
        raise ScheduleError("speeds must be strictly increasing")
    if any(c <= 0.0 for c in c_arr):
        raise ScheduleError("speeds must be positive")
    omegas, als, bes = [], [], []
    for c in c_arr:
        omega = m * c**2 + nu / (2.0 * m)
        if not (0.0 < omega):
            raise ScheduleError(
                f"speed c = {c:g} too small: omega = {omega:g} <= 0 (need c^2 > -nu/(2 m^2))"
            )
        a, b = _derived(m, c, omega)
        omegas.append(omega)
        als.append(a)
        bes.append(b)
    return LimitSchedule(float(m), float(nu), tuple(c_arr), tuple(omegas), tuple(als), tuple(bes))


def schedule_from_pairs(m, nu, pairs):
    """User-supplied (c_n, omega_n) pairs, validated against the limit regime."""
    if not (m > 0.0) or not (nu < 0.0):
        raise ScheduleError("need m > 0 and nu < 0")
    cs, omegas, als, bes = [], [], [], []
    prev_c = 0.0
    for c, omega in pairs:
        c, omega = float(c), float(omega)
        if c <= prev_c:
            raise ScheduleError("speeds must be positive and strictly increasing")
        if not (0.0 < omega < m * c**2):
            raise ScheduleError(f"frequency must satisfy 0 < omega < m*c^2 (got {omega:g})")
        a, b = _derived(m, c, omega)
        cs.append(c)
        omegas.append(omega)
        als.append(a)
        bes.append(b)
        prev_c = c
    return LimitSchedule(float(m), float(nu), tuple(cs), tuple(omegas), tuple(als), tuple(bes))


@dataclass
class ExperimentRow:
    n: int
    c: float
    omega: float
    a: float
    b: float
    v_l2: float
    v_h1: float
    u_err_h1: float
    psi_linf: float
    psi_h1: float
    psi_l4: float
    decay_rate_fit: float
    decay_rate_expected: float
    residual: float
    truncation_L: float


@dataclass
class ExperimentTable:
    schedule: object
    rows: list = field(default_factory=list)
    solutions: list = field(default_factory=list)
    partial: bool = False
    failure: str = ""

    def column(self, key):
        return np.array([getattr(r, key) for r in self.rows])


_FIT_COLUMNS = {"v_h1": "v_h1", "v_l2": "v_l2", "u_err": "u_err_h1"}


def fit_rate(table, column):
    """Log-log least-squares slope of a measured column against the speeds."""
    if column not in _FIT_COLUMNS:
        raise ValueError(f"unknown fit column {column!r}; expected one of {sorted(_FIT_COLUMNS)}")
    y = table.column(_FIT_COLUMNS[column])
    c = table.column("c")
    if len(y) < 3:
        raise ValueError("rate fits need at least 3 converged rows")
    return _loglog_fit(c, y)


def _loglog_fit(x, y):
    return _linear_fit(np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float)))


def _linear_fit(x, y):
    coeffs = np.polyfit(x, y, 1)
    slope = coeffs[0]
    fitted = np.polyval(coeffs, x)
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(r2)


def fit_decay(psi, tail_fraction=1.0 / 3.0):
    """Exponential tail rate of |psi| on the truncated half-lines.

    Fits log|psi| against the coordinate on the outer tail_fraction of each
    half-line, excluding the last 10% of points (Dirichlet boundary layer) and
    values within a factor 10 of the roundoff floor; rates and r^2 are averaged
    across half-lines.
    """
    if not (0.0 < tail_fraction <= 0.5):
        raise ValueError("tail_fraction must lie in (0, 0.5]")
    mesh = psi.mesh
    halflines = mesh.halfline_meshes()
    if not halflines:
        raise ValueError("decay fits need at least one half-line")
    modulus = psi.modulus_at_nodes() if hasattr(psi, "modulus_at_nodes") else np.abs(psi.values)
    floor = 10.0 * np.finfo(float).eps * float(np.max(modulus, initial=0.0))
    rates, r2s = [], []
    for em in halflines:
        x = em.node_x()
        vals = modulus[em.u_idx]
        keep = (x >= (1.0 - tail_fraction) * em.length) & (x <= 0.9 * em.length)
        keep &= vals > floor
        if keep.sum() < 3:
            continue
        slope, r2 = _linear_fit(x[keep], np.log(vals[keep]))
        rates.append(-slope)
        r2s.append(r2)
    if not rates:
        raise ValueError("tail entirely below the roundoff floor")
    return float(np.mean(rates)), float(np.mean(r2s))


def run_limit_sweep(schedule, graph, cfg=None, model=None, tol=1e-10, max_iter=50,
                    tail_fraction=1.0 / 3.0):
    """Solve the target equation and the whole schedule; measure every row.

    Aborts at the first failing solve, keeping the rows already measured and
    marking the table partial.
    """
    from .nonlinearity import PowerLaw

    cfg = cfg or MeshConfig()
    model = model or PowerLaw(4.0)
    table = ExperimentTable(schedule)
    if len(schedule) == 0:
        return table

    mesh_nls = build_mesh(graph, cfg.h, cfg.truncation(float(np.sqrt(-schedule.nu))))
    u_nls, rep = solve_nls(
        NlsProblem(mesh_nls, model, schedule.m, schedule.nu), tol=tol, max_iter=max_iter
    )
    if not rep.converged or rep.trivial_solution:
        table.partial = True
        table.failure = "target Schroedinger solve failed"
        return table

    try:
        steps = continuation_solve(
            schedule, graph, cfg, model, tol=tol, max_iter=max_iter, nls_seed=u_nls
        )
    except ContinuationError as err:
        steps = err.steps
        table.partial = True
        table.failure = str(err)

    for step in steps:
        psi = step.psi
        u_on_nls = transfer_graph_function(psi.u, mesh_nls)
        diff = u_on_nls - u_nls
        try:
            rate_fit, _ = fit_decay(psi, tail_fraction)
        except ValueError:
            rate_fit = float("nan")
        table.rows.append(
            ExperimentRow(
                n=step.index,
                c=step.c,
                omega=step.omega,
                a=schedule.a[step.index],
                b=schedule.b[step.index],
                v_l2=w_component_norm(psi, "l2"),
                v_h1=w_component_norm(psi, "h1"),
                u_err_h1=norm(diff, "h1"),
                psi_linf=norm(psi, "linf"),
                psi_h1=norm(psi, "h1"),
                psi_l4=norm(psi, "lp", p=4),
                decay_rate_fit=rate_fit,
                decay_rate_expected=decay_rate(schedule.m, step.c, step.omega),
                residual=step.report.residual,
                truncation_L=step.truncation_L,
            )
        )
        table.solutions.append(psi)
    return table


def bounds_report(table):
    """Uniformity summary: no growth trend across the sweep.

    "Pass" means the last-row value stays within 1.05x the maximum of the first
    two rows, for the sup, Sobolev and fourth-power norms of the spinor.
    """
    if len(table.rows) < 2:
        raise ValueError("bounds reports need at least 2 rows")
    out = {"pass": True, "criterion": "last row <= 1.05 * max(first two rows)"}
    for key in ("psi_linf", "psi_h1", "psi_l4"):
        col = table.column(key)
        ref = float(np.max(col[:2]))
        ok = bool(col[-1] <= 1.05 * ref)
        out[f"max_{key}"] = float(np.max(col))
        out[f"{key}_ok"] = ok
        out["pass"] = out["pass"] and ok
    return out


def gn_ratio_max(mesh, q=4.0, n_samples=1000, seed=0):
    """Monitored interpolation-inequality ratio over random mesh spinors.

    Reports max ||psi||_q / (||psi||_2^(1/2+1/q) ||psi'||_2^(1/2-1/q)); the
    constant is non-constructive, so this is diagnostic only.
    """
    from .functions import GraphFunction, SpinorFunction

    rng = np.random.default_rng(seed)
    worst = 0.0
    free = np.ones(mesh.n_u, dtype=bool)
    free[mesh.dirichlet_u] = False
    for _ in range(n_samples):
        uv = rng.standard_normal(mesh.n_u) * free
        wv = rng.standard_normal(mesh.n_w)
        psi = SpinorFunction(GraphFunction(mesh, uv), wv)
        lq = norm(psi, "lp", p=q)
        l2 = norm(psi, "l2")
        d2 = np.sqrt(max(norm(psi, "h1") ** 2 - l2**2, 0.0))
        if l2 == 0.0 or d2 == 0.0:
            continue
        worst = max(worst, lq / (l2 ** (0.5 + 1.0 / q) * d2 ** (0.5 - 1.0 / q)))
    return float(worst)
