"""Sampled scalar and spinor fields on a mesh, with quadrature and norms.

Norm conventions (edge-wise, trapezoid quadrature):
  L2, Lp   componentwise p-th power sums over edges,
  Linf     max over nodes (spinors: max over the two components),
  H1       sqrt(L2^2 + L2(derivative)^2); derivatives are centered on edge
           interiors and one-sided at edge ends, per edge.
Spinor Lp norms are ||u||_p^p + ||v||_p^p with v = i*w, so |v| = |w|.
"""

from __future__ import annotations

import numpy as np

_NORM_KINDS = ("l2", "lp", "linf", "h1")


def _as_norm_kind(kind):
    k = kind.lower()
    if k not in _NORM_KINDS:
        raise ValueError(f"unknown norm kind {kind!r}; expected one of L2, Lp, Linf, H1")
    return k


class GraphFunction:
    """Samples at the integer nodes of a mesh, one shared value per glued vertex."""

    __slots__ = ("mesh", "values")

    def __init__(self, mesh, values):
        values = np.asarray(values)
        if values.shape != (mesh.n_u,):
            raise ValueError(f"expected {mesh.n_u} node values, got shape {values.shape}")
        self.mesh = mesh
        self.values = values

    @classmethod
    def zeros(cls, mesh, dtype=float):
        return cls(mesh, np.zeros(mesh.n_u, dtype=dtype))

    @classmethod
    def sample(cls, mesh, fn):
        """Sample fn(edge_id, x_array) -> values on every edge.

        Vertex nodes are written once per incident edge end; fn must be
        continuous across vertices for the result to be well defined.
        """
        values = np.zeros(mesh.n_u, dtype=complex)
        for em in mesh.edges:
            values[em.u_idx] = fn(em.edge_id, em.node_x())
        if np.all(values.imag == 0.0):
            values = values.real.copy()
        return cls(mesh, values)

    def edge_values(self, edge_id):
        return self.values[self.mesh.edge_mesh(edge_id).u_idx]

    def copy(self):
        return GraphFunction(self.mesh, self.values.copy())

    def __add__(self, other):
        self._check_mesh(other)
        return GraphFunction(self.mesh, self.values + other.values)

    def __sub__(self, other):
        self._check_mesh(other)
        return GraphFunction(self.mesh, self.values - other.values)

    def __mul__(self, scalar):
        return GraphFunction(self.mesh, self.values * scalar)

    __rmul__ = __mul__

    def _check_mesh(self, other):
        if other.mesh is not self.mesh:
            raise ValueError("functions live on different meshes")

    def derivative_edgewise(self):
        """Per-edge derivative at integer nodes: centered inside, one-sided at ends.

        Returns a list aligned with mesh.edges (the derivative is edge-local;
        vertex nodes get one value per incident edge end).
        """
        out = []
        for em in self.mesh.edges:
            f = self.values[em.u_idx]
            d = np.empty_like(f)
            d[1:-1] = (f[2:] - f[:-2]) / (2.0 * em.h)
            d[0] = (f[1] - f[0]) / em.h
            d[-1] = (f[-1] - f[-2]) / em.h
            out.append(d)
        return out

    def norm(self, kind, p=None):
        return norm(self, kind, p)


class SpinorFunction:
    """Two-component field: u at integer nodes, w at half-nodes with v = i*w."""

    __slots__ = ("mesh", "u", "w")

    def __init__(self, u, w):
        if not isinstance(u, GraphFunction):
            raise TypeError("u must be a GraphFunction")
        w = np.asarray(w)
        if w.shape != (u.mesh.n_w,):
            raise ValueError(f"expected {u.mesh.n_w} half-node values, got shape {w.shape}")
        self.mesh = u.mesh
        self.u = u
        self.w = w

    @classmethod
    def zeros(cls, mesh, dtype=float):
        return cls(GraphFunction.zeros(mesh, dtype), np.zeros(mesh.n_w, dtype=dtype))

    @property
    def v(self):
        return 1j * self.w

    def copy(self):
        return SpinorFunction(self.u.copy(), self.w.copy())

    def gauged(self, alpha):
        """Multiply both components by exp(i*alpha); |psi| is unchanged."""
        phase = np.exp(1j * alpha)
        return SpinorFunction(
            GraphFunction(self.mesh, self.u.values * phase), self.w * phase
        )

    def modulus_at_nodes(self):
        """|psi| at integer nodes: sqrt(|u|^2 + averaged |w|^2 of adjacent half-nodes)."""
        w2 = self.mesh.modulus_interp() @ np.abs(self.w) ** 2
        return np.sqrt(np.abs(self.u.values) ** 2 + w2)

    def w_derivative_edgewise(self):
        out = []
        for em in self.mesh.edges:
            f = self.w[em.w_start : em.w_start + em.n]
            d = np.empty_like(f)
            if em.n >= 2:
                d[1:-1] = (f[2:] - f[:-2]) / (2.0 * em.h)
                d[0] = (f[1] - f[0]) / em.h
                d[-1] = (f[-1] - f[-2]) / em.h
            else:
                d[:] = 0.0
            out.append(d)
        return out

    def norm(self, kind, p=None):
        return norm(self, kind, p)


def quadrature(f):
    """Trapezoid-rule integral of a GraphFunction over the whole graph."""
    return (f.mesh.u_weight * f.values).sum()


def _scaled_power_sum(values, weights, p):
    # sum(w*|v|^p) computed against overflow for large p
    a = np.abs(values)
    m = a.max(initial=0.0)
    if m == 0.0:
        return 0.0, 0.0
    return m, float((weights * (a / m) ** p).sum())


def _lp_norm(values, weights, p):
    m, s = _scaled_power_sum(values, weights, p)
    return m * s ** (1.0 / p)


def _component_norm(values, u_or_w_weight, deriv_blocks, deriv_weights, kind, p):
    if kind == "l2":
        return _lp_norm(values, u_or_w_weight, 2.0)
    if kind == "lp":
        if p is None:
            raise ValueError("Lp norm needs the exponent p")
        return _lp_norm(values, u_or_w_weight, float(p))
    if kind == "linf":
        return float(np.abs(values).max(initial=0.0))
    # h1
    l2 = _lp_norm(values, u_or_w_weight, 2.0)
    d2 = 0.0
    for d, wts in zip(deriv_blocks, deriv_weights):
        d2 += float((wts * np.abs(d) ** 2).sum())
    return float(np.sqrt(l2 * l2 + d2))


def _edge_trapezoid_weights(em, n_values):
    w = np.full(n_values, em.h)
    w[0] = w[-1] = 0.5 * em.h
    return w


def norm(f, kind, p=None):
    """Norm of a GraphFunction or SpinorFunction: kind in {L2, Lp, Linf, H1}."""
    kind = _as_norm_kind(kind)
    if isinstance(f, GraphFunction):
        deriv = f.derivative_edgewise() if kind == "h1" else []
        dw = [_edge_trapezoid_weights(em, em.n + 1) for em in f.mesh.edges] if kind == "h1" else []
        return _component_norm(f.values, f.mesh.u_weight, deriv, dw, kind, p)
    if isinstance(f, SpinorFunction):
        mesh = f.mesh
        if kind == "linf":
            return max(
                _component_norm(f.u.values, None, None, None, "linf", None),
                _component_norm(f.w, None, None, None, "linf", None),
            )
        du = f.u.derivative_edgewise() if kind == "h1" else []
        duw = [_edge_trapezoid_weights(em, em.n + 1) for em in mesh.edges] if kind == "h1" else []
        dv = f.w_derivative_edgewise() if kind == "h1" else []
        dvw = [_edge_trapezoid_weights(em, em.n) for em in mesh.edges] if kind == "h1" else []
        nu = _component_norm(f.u.values, mesh.u_weight, du, duw, kind, p)
        nw = _component_norm(f.w, mesh.w_weight, dv, dvw, kind, p)
        if kind == "h1" or kind == "l2":
            return float(np.hypot(nu, nw))
        # Lp: (||u||_p^p + ||w||_p^p)^(1/p)
        q = float(p)
        m = max(nu, nw)
        if m == 0.0:
            return 0.0
        return float(m * ((nu / m) ** q + (nw / m) ** q) ** (1.0 / q))
    raise TypeError(f"cannot take a norm of {type(f).__name__}")


def w_component_norm(psi, kind, p=None):
    """Norm of the second spinor component alone (v = i*w, so |v| = |w|)."""
    kind = _as_norm_kind(kind)
    mesh = psi.mesh
    if kind == "linf":
        return float(np.abs(psi.w).max(initial=0.0))
    dv = psi.w_derivative_edgewise() if kind == "h1" else []
    dvw = [_edge_trapezoid_weights(em, em.n) for em in mesh.edges] if kind == "h1" else []
    return _component_norm(psi.w, mesh.w_weight, dv, dvw, kind, p)


def signed_vertex_value(spinor_w, edge_id, vertex, mesh=None):
    """Extrapolate the half-node component to a vertex and apply the edge sign.

    Linear extrapolation from the two half-nodes nearest the vertex; the sign
    is + when the vertex sits at coordinate 0 of the edge and - at the far end.
    """
    if isinstance(spinor_w, SpinorFunction):
        mesh = spinor_w.mesh
        w = spinor_w.w
    else:
        if mesh is None:
            raise ValueError("pass mesh= when giving a raw half-node array")
        w = np.asarray(spinor_w)
    em = mesh.edge_mesh(edge_id)
    edge = mesh._graph_edge(edge_id)
    if em.kind == "halfline":
        at_zero = edge.anchor == vertex
        at_end = False
    else:
        at_zero = edge.vertex_a == vertex
        at_end = edge.vertex_b == vertex
    if not (at_zero or at_end):
        raise ValueError(f"edge {edge_id!r} is not incident at vertex {vertex!r}")
    block = w[em.w_start : em.w_start + em.n]
    if at_zero:
        # nodes at h/2, 3h/2 -> value at 0 is 1.5*w0 - 0.5*w1
        return 1.5 * block[0] - 0.5 * block[1]
    return -(1.5 * block[-1] - 0.5 * block[-2])


def _incident_ends(mesh, em, vertex):
    """Yield True for an incident coordinate-0 end, False for a far end."""
    edge = mesh._graph_edge(em.edge_id)
    if em.kind == "halfline":
        if edge.anchor == vertex:
            yield True
    else:
        if edge.vertex_a == vertex:
            yield True
        if edge.vertex_b == vertex:
            yield False


def kirchhoff_w_sum(psi, vertex):
    """Signed sum of extrapolated second-component values over incident edge ends.

    Diagnostic for the vertex condition imposed weakly by the operator; O(h^2)
    for generic discrete solutions, not an exact zero.
    """
    mesh = psi.mesh
    total = 0.0
    for em in mesh.edges:
        block = psi.w[em.w_start : em.w_start + em.n]
        for at_zero in _incident_ends(mesh, em, vertex):
            if at_zero:
                total += 1.5 * block[0] - 0.5 * block[1]
            else:
                total += -(1.5 * block[-1] - 0.5 * block[-2])
    return total


def kirchhoff_flux_sum(u, vertex):
    """Signed sum of one-sided derivatives of a scalar field at a vertex.

    Uses a 5-point fourth-order stencil per incident edge end, so for an exact
    Kirchhoff solution the sum vanishes to O(h^4).
    """
    mesh = u.mesh
    total = 0.0
    for em in mesh.edges:
        f = u.values[em.u_idx]
        h = em.h
        for at_zero in _incident_ends(mesh, em, vertex):
            if at_zero:
                total += (
                    -25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]
                ) / (12.0 * h)
            else:
                total += (
                    -25.0 * f[-1] + 48.0 * f[-2] - 36.0 * f[-3] + 16.0 * f[-4] + -3.0 * f[-5]
                ) / (12.0 * h)
    return total
