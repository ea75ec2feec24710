"""Discrete Dirac and Schroedinger operators with Kirchhoff-type vertex conditions.

Assembly is a finite-volume / weak form scaled by the trapezoid weights, so
both matrices are exactly (conjugate-)symmetric and the vertex rows encode
the flux conditions weakly: the first-component row at a vertex balances the
half-node fluxes of all incident edge ends, which is precisely where the
signed sum of the second component drops out; the Laplacian vertex row is the
usual stiffness balance (continuity structural, zero signed derivative sum
weak).  Eigenproblems are generalized with the diagonal weight matrix; we
solve the symmetrized form D^{-1/2} A D^{-1/2}.

Unknown ordering: free first-component nodes (truncation nodes eliminated),
then all half-nodes.  The complex matrix acts on (u, v) coefficients; the
real symmetric twin acts on (u, w) with v = i*w (a unitary rescaling of the
half-node block, so both have the same spectrum).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .functions import GraphFunction, SpinorFunction

_DENSE_CUTOFF = 600


class EigensolverError(RuntimeError):
    pass


def _coupling_arrays(mesh):
    """Per-interval (u_left, u_right, w) global indices across all edges."""
    lefts, rights, ws = [], [], []
    for em in mesh.edges:
        lefts.append(em.u_idx[:-1])
        rights.append(em.u_idx[1:])
        ws.append(np.arange(em.w_start, em.w_start + em.n))
    return np.concatenate(lefts), np.concatenate(rights), np.concatenate(ws)


def _dirichlet_nodes(mesh, dirichlet_vertices):
    nodes = list(mesh.dirichlet_u)
    for v in dirichlet_vertices:
        nodes.append(mesh.vertex_node[v])
    return np.unique(np.asarray(nodes, dtype=np.int64)) if nodes else np.empty(0, np.int64)


class _FreeMap:
    def __init__(self, mesh, dirichlet_vertices):
        self.pinned = _dirichlet_nodes(mesh, dirichlet_vertices)
        mask = np.ones(mesh.n_u, dtype=bool)
        mask[self.pinned] = False
        self.free = np.nonzero(mask)[0]
        self.pos = -np.ones(mesh.n_u, dtype=np.int64)
        self.pos[self.free] = np.arange(len(self.free))
        self.n_free = len(self.free)


@dataclass(eq=False)
class DiscreteDirac:
    """First-order staggered operator -ic sigma1 d/dx + m c^2 sigma3 on a mesh."""

    mesh: object
    m: float
    c: float
    matrix: object        # complex Hermitian weak form on (u, v) dofs
    real_matrix: object   # real symmetric twin on (u, w) dofs
    weights: np.ndarray   # diagonal quadrature weights per dof
    _free: object

    @property
    def n_dof(self):
        return self.matrix.shape[0]

    @property
    def n_free_u(self):
        return self._free.n_free

    def spinor_dof(self, psi, representation="w"):
        """Stack a SpinorFunction into the dof vector ((u, w) or (u, v))."""
        u = psi.u.values[self._free.free]
        second = psi.w if representation == "w" else 1j * psi.w
        return np.concatenate([u, np.asarray(second)])

    def dof_spinor(self, x, representation="w"):
        nf = self._free.n_free
        u = np.zeros(self.mesh.n_u, dtype=x.dtype)
        u[self._free.free] = x[:nf]
        w = x[nf:] if representation == "w" else -1j * x[nf:]
        return SpinorFunction(GraphFunction(self.mesh, u), w)

    def apply(self, psi):
        """Pointwise operator application (weak form divided by the weights)."""
        x = self.spinor_dof(psi, "v").astype(complex)
        out = (self.matrix @ x) / self.weights
        return self.dof_spinor(out, "v")

    def quadratic_form(self, psi):
        """Discrete form <psi, D psi>: real for any spinor by Hermiticity."""
        x = self.spinor_dof(psi, "v").astype(complex)
        return float(np.real(np.vdot(x, self.matrix @ x)))

    def inner(self, psi, phi):
        """Weighted discrete L2 product over the operator dofs."""
        x = self.spinor_dof(psi, "v").astype(complex)
        y = self.spinor_dof(phi, "v").astype(complex)
        return complex(np.vdot(x, self.weights * y))


@dataclass(eq=False)
class DiscreteLaplacian:
    """Symmetric stiffness form of -d^2/dx^2 with Kirchhoff vertex conditions."""

    mesh: object
    matrix: object        # real symmetric stiffness on free u-nodes
    weights: np.ndarray   # lumped trapezoid mass per free u-node
    _free: object

    @property
    def n_dof(self):
        return self.matrix.shape[0]

    def free_values(self, f):
        return f.values[self._free.free]

    def embed(self, x):
        vals = np.zeros(self.mesh.n_u, dtype=np.asarray(x).dtype)
        vals[self._free.free] = x
        return GraphFunction(self.mesh, vals)

    def apply(self, f):
        """Pointwise -f'' with Kirchhoff conditions (weak form over the weights)."""
        return self.embed((self.matrix @ self.free_values(f)) / self.weights)


def assemble_dirac(mesh, m, c, dirichlet_vertices=()):
    if not (m > 0.0 and c > 0.0):
        raise ValueError("mass and speed must be positive")
    free = _FreeMap(mesh, dirichlet_vertices)
    lefts, rights, ws = _coupling_arrays(mesh)
    nf = free.n_free
    w_dof = ws + nf

    rows, cols, herm, real = [], [], [], []

    def couple(u_nodes, w_dofs, side):
        # u-row entry -ic*side (w column), w-row entry +ic*side (u column);
        # in (u, w) coordinates both map to +c*side.
        fp = free.pos[u_nodes]
        keep = fp >= 0
        fu, fw = fp[keep], w_dofs[keep]
        n = len(fu)
        rows.append(fu)
        cols.append(fw)
        herm.append(np.full(n, -1j * c * side))
        real.append(np.full(n, c * side))
        rows.append(fw)
        cols.append(fu)
        herm.append(np.full(n, 1j * c * side))
        real.append(np.full(n, c * side))

    couple(lefts, w_dof, +1.0)   # half-node lies after its left node
    couple(rights, w_dof, -1.0)  # and before its right node

    mass = m * c * c
    diag_idx = np.concatenate([np.arange(nf), nf + np.arange(mesh.n_w)])
    diag_val = np.concatenate(
        [mass * mesh.u_weight[free.free], -mass * mesh.w_weight]
    )
    rows.append(diag_idx)
    cols.append(diag_idx)
    herm.append(diag_val.astype(complex))
    real.append(diag_val)

    n = nf + mesh.n_w
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    H = sp.csr_matrix((np.concatenate(herm), (rows, cols)), shape=(n, n))
    K = sp.csr_matrix((np.concatenate(real), (rows, cols)), shape=(n, n))
    weights = np.concatenate([mesh.u_weight[free.free], mesh.w_weight])
    return DiscreteDirac(mesh, float(m), float(c), H, K, weights, free)


def assemble_nls_laplacian(mesh, dirichlet_vertices=()):
    free = _FreeMap(mesh, dirichlet_vertices)
    lefts, rights, _ = _coupling_arrays(mesh)
    inv_h = np.concatenate([np.full(em.n, 1.0 / em.h) for em in mesh.edges])

    fl, fr = free.pos[lefts], free.pos[rights]
    rows, cols, vals = [], [], []
    both = (fl >= 0) & (fr >= 0)
    rows += [fl[both], fr[both]]
    cols += [fr[both], fl[both]]
    vals += [-inv_h[both], -inv_h[both]]
    for fp in (fl, fr):
        keep = fp >= 0
        rows.append(fp[keep])
        cols.append(fp[keep])
        vals.append(inv_h[keep])

    n = free.n_free
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    return DiscreteLaplacian(mesh, A, mesh.u_weight[free.free], free)


# -- eigendecompositions ----------------------------------------------------


@dataclass(eq=False)
class EigenDecomposition:
    """Eigenpairs in the weighted discrete L2 metric, sorted by |eigenvalue|."""

    operator: object
    eigenvalues: np.ndarray
    vectors: np.ndarray      # dof columns, orthonormal in the weight metric
    residuals: np.ndarray
    matrix_scale: float
    is_full: bool

    @property
    def k(self):
        return len(self.eigenvalues)

    def eigenfunction(self, i):
        vec = self.vectors[:, i]
        op = self.operator
        if isinstance(op, DiscreteDirac):
            return op.dof_spinor(vec, "w")
        return op.embed(vec)

    def coefficients(self, f):
        """Expansion coefficients <phi_i, f> in the weight metric."""
        op = self.operator
        if isinstance(op, DiscreteDirac):
            x = op.spinor_dof(f, "w")
            return self.vectors.T @ (op.weights * x)
        x = op.free_values(f)
        return self.vectors.T @ (op.weights * x)


def _sym_problem(op):
    if isinstance(op, DiscreteDirac):
        return op.real_matrix, op.weights
    return op.matrix, op.weights


def _deterministic_start(n):
    # fixed ARPACK start vector so repeated runs are byte-identical
    return np.cos(np.arange(n) * 0.7) + 0.5


def eigen_extremes(op, k):
    """k eigenpairs of smallest magnitude of the weighted eigenproblem."""
    A, D = _sym_problem(op)
    n = A.shape[0]
    if not (1 <= k <= n):
        raise ValueError(f"eigenpair count k must satisfy 1 <= k <= {n}")
    rootD = np.sqrt(D)
    scaling = sp.diags(1.0 / rootD)
    B = sp.csr_matrix(scaling @ A @ scaling)
    scale = float(abs(B).sum(axis=1).max())

    if n <= _DENSE_CUTOFF or k > n - 2:
        lam, Y = scipy.linalg.eigh(B.toarray())
        order = np.lexsort((lam, np.abs(lam)))
        lam, Y = lam[order[:k]], Y[:, order[:k]]
        full = k == n
    else:
        lam, Y = _arpack_near_zero(B, k, scale)
        order = np.lexsort((lam, np.abs(lam)))
        lam, Y = lam[order], Y[:, order]
        full = False

    res = np.array([float(np.linalg.norm(B @ Y[:, i] - lam[i] * Y[:, i])) for i in range(len(lam))])
    if np.any(res > 1e-8 * scale):
        raise EigensolverError(
            f"eigensolver residual {res.max():.3e} exceeds 1e-8 * ||A|| = {1e-8 * scale:.3e}"
        )
    vectors = Y / rootD[:, None]
    return EigenDecomposition(op, lam, vectors, res, scale, full)


def _arpack_near_zero(B, k, scale):
    v0 = _deterministic_start(B.shape[0])
    try:
        return spla.eigsh(B, k=k, sigma=0.0, which="LM", v0=v0)
    except (RuntimeError, spla.ArpackError):
        # singular at 0 (e.g. Kirchhoff Laplacian on a compact graph): nudge the shift
        return spla.eigsh(B, k=k, sigma=-1e-8 * scale, which="LM", v0=v0)


def eigen_full(op):
    """Complete decomposition; quadratic cost, meant for coarse meshes."""
    n = _sym_problem(op)[0].shape[0]
    if n > 6000:
        raise ValueError(f"refusing a dense eigendecomposition of dimension {n}")
    return eigen_extremes(op, n)


def energy_norm(psi, eig):
    """Spectral norm || |D|^(1/2) psi ||_L2 from a full decomposition."""
    if not eig.is_full:
        raise ValueError("energy norm needs a full eigendecomposition")
    a = eig.coefficients(psi)
    return float(np.sqrt(np.sum(np.abs(eig.eigenvalues) * np.abs(a) ** 2)))


def spectral_split(psi, eig):
    """Projections onto the positive and negative spectral subspaces."""
    if not eig.is_full:
        raise ValueError("spectral projection needs a full eigendecomposition")
    op = eig.operator
    a = eig.coefficients(psi)
    out = []
    for sign in (+1.0, -1.0):
        sel = eig.eigenvalues * sign > 0.0
        x = eig.vectors[:, sel] @ a[sel]
        if isinstance(op, DiscreteDirac):
            out.append(op.dof_spinor(x, "w"))
        else:
            out.append(op.embed(x))
    return tuple(out)
