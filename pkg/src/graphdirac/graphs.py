"""Metric graphs: bounded edges and half-lines glued at vertices."""

from __future__ import annotations

from dataclasses import dataclass


class GraphError(ValueError):
    """Invalid graph structure or graph description document."""


class GraphParseError(GraphError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class BoundedEdge:
    id: str
    vertex_a: str
    vertex_b: str
    length: float


@dataclass(frozen=True)
class HalfLine:
    id: str
    anchor: str


@dataclass(frozen=True)
class MetricGraph:
    """Connected multigraph of bounded edges and half-lines.

    Bounded edges carry a coordinate in [0, length] with 0 at vertex_a;
    half-lines carry [0, inf) with 0 at the anchor vertex.  Self-loops and
    parallel edges are allowed.
    """

    name: str
    vertices: tuple
    bounded_edges: tuple
    halflines: tuple

    def __post_init__(self):
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise GraphError("duplicate vertex id")
        ids = [e.id for e in self.bounded_edges] + [h.id for h in self.halflines]
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate edge id")
        for e in self.bounded_edges:
            for v in (e.vertex_a, e.vertex_b):
                if v not in vset:
                    raise GraphError(f"edge {e.id!r} references undeclared vertex {v!r}")
            if not (e.length > 0.0) or e.length != e.length or e.length == float("inf"):
                raise GraphError(f"edge {e.id!r} has nonpositive or non-finite length")
        for h in self.halflines:
            if h.anchor not in vset:
                raise GraphError(f"halfline {h.id!r} references undeclared vertex {h.anchor!r}")
        if not self._is_connected():
            raise GraphError("graph is not connected")

    def _is_connected(self):
        if len(self.vertices) <= 1:
            return True
        adjacency = {v: set() for v in self.vertices}
        for e in self.bounded_edges:
            adjacency[e.vertex_a].add(e.vertex_b)
            adjacency[e.vertex_b].add(e.vertex_a)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for nb in adjacency[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == len(self.vertices)

    @property
    def is_compact(self):
        return not self.halflines

    def degree(self, vertex):
        """Number of edge ends incident at the vertex (a self-loop counts twice)."""
        d = 0
        for e in self.bounded_edges:
            d += (e.vertex_a == vertex) + (e.vertex_b == vertex)
        for h in self.halflines:
            d += h.anchor == vertex
        return d

    def max_degree_vertex(self):
        return max(self.vertices, key=lambda v: (self.degree(v), -self.vertices.index(v)))

    def compact_core(self):
        return CompactCore(
            bounded_edges=self.bounded_edges,
            total_length=float(sum(e.length for e in self.bounded_edges)),
        )


@dataclass(frozen=True)
class CompactCore:
    """The subgraph of all bounded edges and its total length."""

    bounded_edges: tuple
    total_length: float


def compact_core(graph):
    return graph.compact_core()


def parse_graph(text):
    """Parse a line-oriented graph description document into a MetricGraph.

    Format (order of sections free, '#' starts a comment)::

        graph <name>
        vertex <id>
        edge <id> <vertex_a> <vertex_b> <length>
        halfline <id> <anchor_vertex>
    """
    name = ""
    vertices = []
    edges = []
    halflines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kw = tokens[0]
        if kw == "graph":
            if len(tokens) != 2:
                raise GraphParseError("expected: graph <name>", lineno)
            name = tokens[1]
        elif kw == "vertex":
            if len(tokens) != 2:
                raise GraphParseError("expected: vertex <id>", lineno)
            vertices.append(tokens[1])
        elif kw == "edge":
            if len(tokens) != 5:
                raise GraphParseError("expected: edge <id> <vertex_a> <vertex_b> <length>", lineno)
            try:
                length = float(tokens[4])
            except ValueError:
                raise GraphParseError(f"bad length {tokens[4]!r}", lineno) from None
            edges.append(BoundedEdge(tokens[1], tokens[2], tokens[3], length))
        elif kw == "halfline":
            if len(tokens) != 3:
                raise GraphParseError("expected: halfline <id> <anchor_vertex>", lineno)
            halflines.append(HalfLine(tokens[1], tokens[2]))
        else:
            raise GraphParseError(f"unknown keyword {kw!r}", lineno)
    try:
        return MetricGraph(name, tuple(vertices), tuple(edges), tuple(halflines))
    except GraphError as err:
        raise GraphParseError(str(err)) from None


def format_graph(graph):
    """Inverse of parse_graph; round-trips exactly (lengths written with 17 digits)."""
    lines = [f"graph {graph.name}" if graph.name else "graph g"]
    lines += [f"vertex {v}" for v in graph.vertices]
    lines += [
        f"edge {e.id} {e.vertex_a} {e.vertex_b} {format(e.length, '.17g')}"
        for e in graph.bounded_edges
    ]
    lines += [f"halfline {h.id} {h.anchor}" for h in graph.halflines]
    return "\n".join(lines) + "\n"


def load_graph(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())


def line_graph():
    """Two half-lines at one vertex: a graph isometric to the real line."""
    return parse_graph("graph line\nvertex o\nhalfline h1 o\nhalfline h2 o\n")


def star_graph(rays=3):
    """Star of half-lines at a single vertex."""
    body = "".join(f"halfline h{i + 1} o\n" for i in range(rays))
    return parse_graph(f"graph star{rays}\nvertex o\n" + body)
