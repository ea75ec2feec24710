"""Staggered meshes on metric graphs.

Each edge carries a uniform step h_e.  Scalar fields and the first spinor
component live on integer nodes x_j = j*h_e; the second spinor component
lives on half-integer nodes x_{j+1/2} (staggering avoids the spurious
mid-gap spectrum of naive central differences for first-order operators).
Half-lines are truncated to [0, L] with a Dirichlet-zero terminal node.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graphs import GraphError

MIN_INTERVALS = 4


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeMesh:
    edge_id: str
    kind: str                 # "bounded" | "halfline"
    length: float             # edge length, or truncation length L for half-lines
    n: int                    # number of intervals
    h: float
    u_idx: np.ndarray         # global u-node index for local nodes 0..n
    w_start: int              # global index of local half-node 0 is w_start
    dirichlet_end: bool       # true for truncated half-lines (node n is pinned to 0)

    def node_x(self):
        return np.arange(self.n + 1) * self.h

    def half_x(self):
        return (np.arange(self.n) + 0.5) * self.h

    def w_idx(self):
        return np.arange(self.w_start, self.w_start + self.n)


@dataclass(frozen=True, eq=False)
class Mesh:
    graph: object
    target_h: float
    truncation_L: float
    edges: tuple
    vertex_node: dict
    n_u: int
    n_w: int
    u_weight: np.ndarray      # trapezoid quadrature weight per u-node
    w_weight: np.ndarray      # quadrature weight per half-node
    dirichlet_u: np.ndarray   # global indices of Dirichlet-pinned u-nodes
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    # -- degrees of freedom ------------------------------------------------

    def free_u(self):
        """Global indices of non-Dirichlet u-nodes."""
        mask = np.ones(self.n_u, dtype=bool)
        mask[self.dirichlet_u] = False
        return np.nonzero(mask)[0]

    def free_pos(self):
        """Map global u-node index -> position among free u-nodes (-1 if pinned)."""
        pos = -np.ones(self.n_u, dtype=np.int64)
        pos[self.free_u()] = np.arange(self.n_u - len(self.dirichlet_u))
        return pos

    def modulus_interp(self):
        """Row-stochastic matrix averaging half-node values (used on w^2) to u-nodes.

        Interior nodes average the two adjacent half-nodes of their edge; a
        vertex node averages the nearest half-node of every incident edge end;
        a truncation node takes its single neighbour.
        """
        if "P2" in self._cache:
            return self._cache["P2"]
        rows, cols, vals = [], [], []
        counts = np.zeros(self.n_u)
        for em in self.edges:
            w0 = em.w_start
            for j in range(em.n + 1):
                node = em.u_idx[j]
                if j > 0:
                    rows.append(node)
                    cols.append(w0 + j - 1)
                    vals.append(1.0)
                    counts[node] += 1.0
                if j < em.n:
                    rows.append(node)
                    cols.append(w0 + j)
                    vals.append(1.0)
                    counts[node] += 1.0
        vals = np.asarray(vals) / counts[np.asarray(rows)]
        P2 = sp.csr_matrix((vals, (rows, cols)), shape=(self.n_u, self.n_w))
        self._cache["P2"] = P2
        return P2

    # -- geometry ----------------------------------------------------------

    def vertex_distances(self, source_vertex):
        """Shortest-path distance from a vertex to every vertex (along bounded edges)."""
        graph = self.graph
        dist = {v: np.inf for v in graph.vertices}
        dist[source_vertex] = 0.0
        heap = [(0.0, source_vertex)]
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist[v]:
                continue
            for e in graph.bounded_edges:
                for a, b in ((e.vertex_a, e.vertex_b), (e.vertex_b, e.vertex_a)):
                    if a == v and d + e.length < dist[b]:
                        dist[b] = d + e.length
                        heapq.heappush(heap, (dist[b], b))
        return dist

    def u_node_distances(self, source_vertex):
        """Graph distance from source_vertex to every u-node."""
        vdist = self.vertex_distances(source_vertex)
        out = np.empty(self.n_u)
        for em in self.edges:
            x = em.node_x()
            edge = self._graph_edge(em.edge_id)
            if em.kind == "halfline":
                d = vdist[edge.anchor] + x
            else:
                d = np.minimum(vdist[edge.vertex_a] + x, vdist[edge.vertex_b] + (em.length - x))
            out[em.u_idx] = d
        return out

    def _graph_edge(self, edge_id):
        for e in self.graph.bounded_edges:
            if e.id == edge_id:
                return e
        for h in self.graph.halflines:
            if h.id == edge_id:
                return h
        raise KeyError(edge_id)

    def edge_mesh(self, edge_id):
        for em in self.edges:
            if em.edge_id == edge_id:
                return em
        raise KeyError(edge_id)

    def halfline_meshes(self):
        return [em for em in self.edges if em.kind == "halfline"]

    def total_intervals(self):
        return sum(em.n for em in self.edges)


def build_mesh(graph, h, L):
    """Discretize a metric graph with target step h and half-line truncation L.

    Per-edge steps are rounded so each edge holds an integer number of
    intervals (gluing nodes stay exact); every edge needs at least
    MIN_INTERVALS intervals.
    """
    if not (h > 0.0):
        raise MeshError("target step h must be positive")
    if graph.halflines and L < 10.0 * h:
        raise MeshError("truncation length L must be at least 10*h")
    if not graph.bounded_edges and not graph.halflines:
        raise GraphError("graph has no edges")

    vertex_node = {v: i for i, v in enumerate(graph.vertices)}
    next_u = len(graph.vertices)
    next_w = 0
    edge_meshes = []
    dirichlet = []

    def interior_indices(n):
        nonlocal next_u
        idx = np.arange(next_u, next_u + n - 1)
        next_u += n - 1
        return idx

    for e in graph.bounded_edges:
        n = int(round(e.length / h))
        if n < MIN_INTERVALS:
            raise MeshError(
                f"step {h} too coarse for edge {e.id!r} (length {e.length}): "
                f"{max(n - 1, 0)} interior nodes"
            )
        u_idx = np.empty(n + 1, dtype=np.int64)
        u_idx[0] = vertex_node[e.vertex_a]
        u_idx[-1] = vertex_node[e.vertex_b]
        u_idx[1:-1] = interior_indices(n)
        edge_meshes.append(
            EdgeMesh(e.id, "bounded", e.length, n, e.length / n, u_idx, next_w, False)
        )
        next_w += n

    for hl in graph.halflines:
        n = int(round(L / h))
        u_idx = np.empty(n + 1, dtype=np.int64)
        u_idx[0] = vertex_node[hl.anchor]
        u_idx[1:-1] = interior_indices(n)
        u_idx[-1] = next_u
        dirichlet.append(next_u)
        next_u += 1
        edge_meshes.append(EdgeMesh(hl.id, "halfline", L, n, L / n, u_idx, next_w, True))
        next_w += n

    u_weight = np.zeros(next_u)
    w_weight = np.zeros(next_w)
    for em in edge_meshes:
        we = np.full(em.n + 1, em.h)
        we[0] = we[-1] = 0.5 * em.h
        np.add.at(u_weight, em.u_idx, we)
        w_weight[em.w_start : em.w_start + em.n] = em.h

    return Mesh(
        graph=graph,
        target_h=float(h),
        truncation_L=float(L),
        edges=tuple(edge_meshes),
        vertex_node=vertex_node,
        n_u=next_u,
        n_w=next_w,
        u_weight=u_weight,
        w_weight=w_weight,
        dirichlet_u=np.asarray(dirichlet, dtype=np.int64),
    )
