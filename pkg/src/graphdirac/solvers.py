"""Stationary bound states by damped Newton iteration with continuation.

Real reduction: with the first component u real at integer nodes and the
second component v = i*w, w real at half-nodes, the stationary two-component
system closes over the reals:

    c w' + (m c^2 - omega) u = g(|psi|) u      (integer nodes)
    -c u' - (m c^2 + omega) w = ghat_k w       (half-nodes)

where |psi|^2 = u^2 + (averaged adjacent w^2) and ghat_k is the half-node
coefficient obtained by transposing the same averaging.  This specific pairing
makes the discrete system the exact gradient of the discrete action, so
criticality identities hold to solver precision.  Gauge multiples e^{i a} psi
solve the complex system with identical residual.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .functions import GraphFunction, SpinorFunction, norm
from .mesh import build_mesh
from .operators import assemble_dirac, assemble_nls_laplacian

DAMPING_FLOOR = 2.0**-20
TRIVIAL_H1 = 1e-6


class SolverError(RuntimeError):
    pass


class ContinuationError(SolverError):
    def __init__(self, message, index, steps):
        super().__init__(message)
        self.index = index
        self.steps = steps


@dataclass
class NldeProblem:
    """Stationary nonlinear Dirac problem at frequency omega inside the gap."""

    mesh: object
    model: object
    m: float
    c: float
    omega: float

    def __post_init__(self):
        if not (self.m > 0.0 and self.c > 0.0):
            raise ValueError("mass and speed must be positive")
        if not (abs(self.omega) < self.m * self.c**2):
            raise ValueError("frequency must satisfy |omega| < m*c^2")

    @property
    def in_limit_regime(self):
        return self.omega > 0.0

    def decay_rate(self):
        """Tail rate sqrt(m^2 c^4 - omega^2)/c of localized solutions."""
        return decay_rate(self.m, self.c, self.omega)


@dataclass
class NlsProblem:
    """Stationary Schroedinger problem -u'' - nu u = 2 m g(|u|) u with nu < 0."""

    mesh: object
    model: object
    m: float
    nu: float

    def __post_init__(self):
        if not (self.m > 0.0):
            raise ValueError("mass must be positive")
        if not (self.nu < 0.0):
            raise ValueError("frequency nu must be negative")


@dataclass
class SolveReport:
    converged: bool = False
    iterations: int = 0
    residual: float = float("inf")
    damping_history: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)
    boundary_magnitude: float = 0.0
    boundary_fraction: float = 0.0
    trivial_solution: bool = False
    notes: list = field(default_factory=list)


def decay_rate(m, c, omega):
    if not (abs(omega) < m * c**2):
        raise ValueError("no spectral-gap decay rate: |omega| >= m*c^2")
    return float(np.sqrt(m**2 * c**4 - omega**2) / c)


# -- Newton core -------------------------------------------------------------


def _weighted_resnorm(F, weights):
    return float(np.sqrt(np.sum(np.abs(F) ** 2 / weights)))


def _damped_newton(x0, residual, jacobian, weights, tol, max_iter):
    report = SolveReport()
    x = x0
    F = residual(x)
    rn = _weighted_resnorm(F, weights)
    report.residual_history.append(rn)
    for _ in range(max_iter):
        if rn <= tol:
            report.converged = True
            break
        J = jacobian(x)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", spla.MatrixRankWarning)
            try:
                delta = spla.spsolve(J.tocsc(), -F)
            except RuntimeError as err:
                report.notes.append(f"jacobian solve failed: {err}")
                break
        if not np.all(np.isfinite(delta)):
            report.notes.append(
                f"jacobian singular at iteration {report.iterations} (last damping "
                f"{report.damping_history[-1] if report.damping_history else 1.0})"
            )
            break
        eta = 1.0
        accepted = False
        while eta >= DAMPING_FLOOR:
            x_trial = x + eta * delta
            F_trial = residual(x_trial)
            rn_trial = _weighted_resnorm(F_trial, weights)
            if rn_trial <= (1.0 - 1e-4 * eta) * rn or rn_trial <= tol:
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            report.notes.append("line search hit the damping floor")
            break
        x, F, rn = x_trial, F_trial, rn_trial
        report.iterations += 1
        report.damping_history.append(eta)
        report.residual_history.append(rn)
    else:
        report.converged = rn <= tol
        if not report.converged:
            report.notes.append(f"no convergence in {max_iter} iterations")
    report.residual = rn
    return x, report


# -- NLS ---------------------------------------------------------------------


class _NlsSystem:
    def __init__(self, prob, dirichlet_vertices=()):
        self.prob = prob
        self.lap = assemble_nls_laplacian(prob.mesh, dirichlet_vertices)
        self.A = self.lap.matrix
        self.W = self.lap.weights
        self.nu = prob.nu
        self.two_m = 2.0 * prob.m
        self.model = prob.model

    def residual(self, u):
        a = np.abs(u)
        return self.A @ u - self.nu * self.W * u - self.two_m * self.W * self.model.g(a) * u

    def jacobian(self, u):
        a = np.abs(u)
        g = self.model.g(a)
        gp = np.zeros_like(a)
        pos = a > 0.0
        gp[pos] = np.asarray(self.model.gprime(a[pos]), dtype=float)
        diag = self.nu * self.W + self.two_m * self.W * (g + gp * a)
        return self.A - sp.diags(diag)


def default_nls_guess(prob):
    """Localized bump seeded at the vertex of maximal degree.

    Exact line soliton profile for the power nonlinearity, used as a heuristic
    on general graphs: amplitude (p|nu|/(4m))^(1/(p-2)), width sqrt(|nu|).
    """
    mesh = prob.mesh
    p = float(getattr(prob.model, "p", 4.0))
    absnu = -prob.nu
    amp = (p * absnu / (4.0 * prob.m)) ** (1.0 / (p - 2.0))
    rate = np.sqrt(absnu) * (p - 2.0) / 2.0
    d = mesh.u_node_distances(mesh.graph.max_degree_vertex())
    with np.errstate(over="ignore"):
        profile = amp * (1.0 / np.cosh(rate * d)) ** (2.0 / (p - 2.0))
    return GraphFunction(mesh, profile)


def _boundary_magnitude_nls(u):
    mesh = u.mesh
    worst = 0.0
    for em in mesh.halfline_meshes():
        worst = max(worst, abs(u.values[em.u_idx[-2]]))
    return worst


def solve_nls(prob, guess=None, tol=1e-10, max_iter=50, dirichlet_vertices=()):
    """Newton solve of the stationary Schroedinger equation on the graph.

    Returns the real solution and a report; a converged run with
    ||u||_H1 < 1e-6 is flagged as a trivial (zero) solution.
    """
    if not (tol > 0.0):
        raise ValueError("tolerance must be positive")
    sys_ = _NlsSystem(prob, dirichlet_vertices)
    if guess is None:
        guess = default_nls_guess(prob)
    if np.iscomplexobj(guess.values):
        raise ValueError("the Schroedinger solver works on real fields")
    x0 = sys_.lap.free_values(guess).astype(float)
    x, report = _damped_newton(x0, sys_.residual, sys_.jacobian, sys_.W, tol, max_iter)
    u = sys_.lap.embed(x)
    report.boundary_magnitude = _boundary_magnitude_nls(u)
    umax = float(np.abs(u.values).max(initial=0.0))
    report.boundary_fraction = report.boundary_magnitude / umax if umax > 0 else 0.0
    if report.converged and norm(u, "h1") < TRIVIAL_H1:
        report.trivial_solution = True
        report.notes.append("converged to the trivial zero solution")
    return u, report


def nls_residual(u, prob, dirichlet_vertices=()):
    sys_ = _NlsSystem(prob, dirichlet_vertices)
    return _weighted_resnorm(sys_.residual(sys_.lap.free_values(u)), sys_.W)


def action_j(u, prob):
    """Energy functional whose critical points solve the stationary equation."""
    sys_ = _NlsSystem(prob)
    x = sys_.lap.free_values(u)
    quad = 0.5 * float(x @ (sys_.A @ x)) - 0.5 * prob.nu * float(x @ (sys_.W * x))
    return quad - 2.0 * prob.m * float(sys_.W @ np.asarray(prob.model.G(np.abs(x))))


# -- NLDE --------------------------------------------------------------------


class _NldeSystem:
    """Gradient and Hessian of the discrete action in (u, w) coordinates."""

    def __init__(self, prob, dirichlet_vertices=()):
        self.prob = prob
        self.dirac = assemble_dirac(prob.mesh, prob.m, prob.c, dirichlet_vertices)
        self.K = self.dirac.real_matrix
        self.D = self.dirac.weights
        self.nf = self.dirac.n_free_u
        free = self.dirac._free.free
        self.Wg = prob.mesh.u_weight[free]
        self.P2 = sp.csr_matrix(prob.mesh.modulus_interp()[free])
        self.P2T = sp.csr_matrix(self.P2.T)
        self.omega = prob.omega
        self.model = prob.model

    def split(self, x):
        return x[: self.nf], x[self.nf :]

    def rho(self, x):
        u, w = self.split(x)
        return np.sqrt(np.abs(u) ** 2 + self.P2 @ (np.abs(w) ** 2))

    def residual(self, x):
        u, w = self.split(x)
        g = np.asarray(self.model.g(self.rho(x)), dtype=float)
        N = np.concatenate([self.Wg * g * u, (self.P2T @ (self.Wg * g)) * w])
        return self.K @ x - self.omega * self.D * x - N

    def jacobian(self, x):
        u, w = self.split(x)
        r = self.rho(x)
        g = np.asarray(self.model.g(r), dtype=float)
        gp_over_r = np.zeros_like(r)
        pos = r > 0.0
        gp_over_r[pos] = np.asarray(self.model.gprime(r[pos]), dtype=float) / r[pos]
        a = self.Wg * (g + gp_over_r * u**2)
        b = self.Wg * gp_over_r * u
        Dw = sp.diags(w)
        uw = sp.csr_matrix(sp.diags(b) @ self.P2 @ Dw)
        ww = sp.diags(self.P2T @ (self.Wg * g)) + Dw @ self.P2T @ sp.diags(
            self.Wg * gp_over_r
        ) @ self.P2 @ Dw
        dN = sp.bmat([[sp.diags(a), uw], [uw.T, ww]], format="csr")
        return self.K - self.omega * sp.diags(self.D) - dN

    def action(self, x):
        quad = 0.5 * np.real(np.vdot(x, self.K @ x)) - 0.5 * self.omega * float(
            np.sum(self.D * np.abs(x) ** 2)
        )
        return float(quad - self.Wg @ np.asarray(self.model.G(self.rho(x)), dtype=float))

    def spinor_dof(self, psi):
        return self.dirac.spinor_dof(psi, "w")

    def dof_spinor(self, x):
        return self.dirac.dof_spinor(x, "w")


def lift_guess(u, prob):
    """Spinor seed from a scalar field via the reduction identity.

    Second component w = -c u' / (m c^2 + omega + g(|u|)) sampled at the
    half-nodes (staggered centered differences; |u| by two-point averaging).
    """
    if np.iscomplexobj(u.values):
        raise ValueError("lift expects a real first component")
    mesh = u.mesh
    w = np.zeros(mesh.n_w)
    denom0 = prob.m * prob.c**2 + prob.omega
    for em in mesh.edges:
        f = u.values[em.u_idx]
        du = (f[1:] - f[:-1]) / em.h
        ubar = 0.5 * np.abs(f[1:] + f[:-1])
        w[em.w_start : em.w_start + em.n] = -prob.c * du / (
            denom0 + np.asarray(prob.model.g(ubar), dtype=float)
        )
    return SpinorFunction(u.copy(), w)


def _boundary_magnitude_nlde(psi):
    mesh = psi.mesh
    worst = 0.0
    for em in mesh.halfline_meshes():
        worst = max(worst, abs(psi.u.values[em.u_idx[-2]]))
        worst = max(worst, abs(psi.w[em.w_start + em.n - 1]))
    return worst


def solve_nlde(prob, guess, tol=1e-10, max_iter=50, dirichlet_vertices=()):
    """Damped Newton solve of the stationary system from a spinor guess."""
    if not (tol > 0.0):
        raise ValueError("tolerance must be positive")
    if guess.mesh is not prob.mesh:
        raise ValueError("guess lives on a different mesh")
    if np.iscomplexobj(guess.u.values) or np.iscomplexobj(guess.w):
        raise ValueError("the Newton solver works in the real (u, w) reduction")
    sys_ = _NldeSystem(prob, dirichlet_vertices)
    x0 = sys_.spinor_dof(guess).astype(float)
    x, report = _damped_newton(x0, sys_.residual, sys_.jacobian, sys_.D, tol, max_iter)
    psi = sys_.dof_spinor(x)
    report.boundary_magnitude = _boundary_magnitude_nlde(psi)
    psimax = max(
        float(np.abs(psi.u.values).max(initial=0.0)), float(np.abs(psi.w).max(initial=0.0))
    )
    report.boundary_fraction = report.boundary_magnitude / psimax if psimax > 0 else 0.0
    if report.boundary_fraction > 1e-6:
        report.notes.append(
            "truncation boundary carries "
            f"{report.boundary_fraction:.2e} of ||psi||_inf; L too small"
        )
    if not prob.in_limit_regime:
        report.notes.append("frequency outside the nonrelativistic regime (omega <= 0)")
    if report.converged and _spinor_h1(psi) < TRIVIAL_H1:
        report.trivial_solution = True
        report.notes.append("converged to the trivial zero solution")
    return psi, report


def _spinor_h1(psi):
    return norm(psi, "h1")


def nlde_residual(psi, prob):
    """Discrete strong-form defect norm; supports complex (gauged) spinors."""
    sys_ = _NldeSystem(prob)
    x = sys_.spinor_dof(psi)
    return _weighted_resnorm(sys_.residual(x), sys_.D)


def nlde_defect_direct(psi, prob):
    """Matrix-free evaluation of the same defect, as an independent path."""
    mesh = psi.mesh
    m, c, omega = prob.m, prob.c, prob.omega
    u = psi.u.values
    w = psi.w
    dtype = complex if np.iscomplexobj(u) or np.iscomplexobj(w) else float

    # moduli at integer nodes: mean of adjacent |w|^2 per node
    w2sum = np.zeros(mesh.n_u)
    count = np.zeros(mesh.n_u)
    for em in mesh.edges:
        blk = np.abs(w[em.w_start : em.w_start + em.n]) ** 2
        np.add.at(w2sum, em.u_idx[:-1], blk)
        np.add.at(w2sum, em.u_idx[1:], blk)
        np.add.at(count, em.u_idx[:-1], 1.0)
        np.add.at(count, em.u_idx[1:], 1.0)
    rho = np.sqrt(np.abs(u) ** 2 + w2sum / count)
    g = np.asarray(prob.model.g(rho), dtype=float)
    free = np.ones(mesh.n_u, dtype=bool)
    free[mesh.dirichlet_u] = False

    flux_u = np.zeros(mesh.n_u, dtype=dtype)   # accumulates c * w-differences
    r_w = np.zeros(mesh.n_w, dtype=dtype)
    ghat_w = np.zeros(mesh.n_w)
    for em in mesh.edges:
        sl = slice(em.w_start, em.w_start + em.n)
        blk = w[sl]
        np.add.at(flux_u, em.u_idx[:-1], c * blk)
        np.add.at(flux_u, em.u_idx[1:], -c * blk)
        f = u[em.u_idx]
        r_w[sl] = -c * (f[1:] - f[:-1]) / em.h - (m * c**2 + omega) * blk
        # pinned nodes do not feed the half-node coefficient
        wu = free[em.u_idx] * mesh.u_weight[em.u_idx] * g[em.u_idx] / count[em.u_idx]
        ghat_w[sl] = (wu[:-1] + wu[1:]) / mesh.w_weight[sl]
    r_w -= ghat_w * w

    r_u = flux_u / mesh.u_weight + (m * c**2 - omega - g) * u
    total = np.sum(mesh.u_weight[free] * np.abs(r_u[free]) ** 2)
    total += np.sum(mesh.w_weight * np.abs(r_w) ** 2)
    return float(np.sqrt(total))


def action_phi(psi, prob):
    """Relativistic action; equals the integral of the defect Ghat at critical points."""
    sys_ = _NldeSystem(prob)
    return sys_.action(sys_.spinor_dof(psi))


# -- continuation ------------------------------------------------------------


@dataclass
class MeshConfig:
    """Mesh controls for continuation runs.

    With L unset, each solve truncates its half-lines at L_factor divided by
    the analytic decay rate (rounded up to a multiple of h so meshes share a
    lattice); contaminated boundaries trigger doubling.
    """

    h: float = 0.01
    L: float = None
    L_factor: float = 32.0
    boundary_tol: float = 1e-6
    max_L_doublings: int = 2

    def truncation(self, rate):
        if self.L is not None:
            return float(self.L)
        return float(np.ceil(self.L_factor / rate / self.h) * self.h)


@dataclass
class ContinuationStep:
    index: int
    c: float
    omega: float
    psi: object
    report: object
    truncation_L: float


def transfer_graph_function(f, mesh_new):
    """Move samples to a mesh sharing the lattice (pad/truncate half-line tails)."""
    vals = np.zeros(mesh_new.n_u, dtype=f.values.dtype)
    for em_new in mesh_new.edges:
        em_old = f.mesh.edge_mesh(em_new.edge_id)
        if not np.isclose(em_old.h, em_new.h, rtol=1e-12, atol=0.0):
            raise ValueError("meshes do not share a lattice")
        n = min(em_old.n, em_new.n)
        vals[em_new.u_idx[: n + 1]] = f.values[em_old.u_idx[: n + 1]]
        if em_new.dirichlet_end:
            vals[em_new.u_idx[-1]] = 0.0
    return GraphFunction(mesh_new, vals)


def transfer_spinor(psi, mesh_new):
    u = transfer_graph_function(psi.u, mesh_new)
    w = np.zeros(mesh_new.n_w, dtype=psi.w.dtype)
    for em_new in mesh_new.edges:
        em_old = psi.mesh.edge_mesh(em_new.edge_id)
        n = min(em_old.n, em_new.n)
        w[em_new.w_start : em_new.w_start + n] = psi.w[em_old.w_start : em_old.w_start + n]
    return SpinorFunction(u, w)


def continuation_solve(schedule, graph, cfg, model, tol=1e-10, max_iter=50, nls_seed=None):
    """Solve the whole schedule, seeding each frequency with the previous solution.

    The first solve is seeded by lifting the Schroedinger bound state (computed
    here unless nls_seed supplies one).  Returns a ContinuationStep per entry;
    raises ContinuationError carrying completed steps when a solve fails.
    """
    steps = []
    if len(schedule.c) == 0:
        return steps
    if nls_seed is None:
        mesh_nls = build_mesh(graph, cfg.h, cfg.truncation(np.sqrt(-schedule.nu)))
        u_nls, rep = solve_nls(
            NlsProblem(mesh_nls, model, schedule.m, schedule.nu), tol=tol, max_iter=max_iter
        )
        if not rep.converged or rep.trivial_solution:
            raise ContinuationError("Schroedinger seed solve failed", -1, steps)
    else:
        u_nls = nls_seed

    prev = None
    for n, (c_n, omega_n) in enumerate(zip(schedule.c, schedule.omega)):
        L_n = cfg.truncation(decay_rate(schedule.m, c_n, omega_n))
        attempts = 0
        while True:
            mesh_n = build_mesh(graph, cfg.h, L_n)
            prob = NldeProblem(mesh_n, model, schedule.m, c_n, omega_n)
            if prev is None:
                seed = lift_guess(transfer_graph_function(u_nls, mesh_n), prob)
            else:
                seed = transfer_spinor(prev, mesh_n)
            psi, report = solve_nlde(prob, seed, tol=tol, max_iter=max_iter)
            ok = report.converged and not report.trivial_solution
            contaminated = report.boundary_fraction > cfg.boundary_tol
            if ok and contaminated and attempts < cfg.max_L_doublings:
                L_n *= 2.0
                attempts += 1
                continue
            break
        if not ok:
            raise ContinuationError(
                f"solve failed at schedule index {n} (c = {c_n:g}): "
                + "; ".join(report.notes or ["no convergence"]),
                n,
                steps,
            )
        steps.append(ContinuationStep(n, c_n, omega_n, psi, report, L_n))
        prev = psi
    return steps
