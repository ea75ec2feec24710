import numpy as np
import pytest

import graphdirac as gd
from graphdirac.functions import GraphFunction, SpinorFunction


def _random_spinor(mesh, rng, dtype=float):
    u = rng.standard_normal(mesh.n_u).astype(dtype)
    w = rng.standard_normal(mesh.n_w).astype(dtype)
    return SpinorFunction(GraphFunction(mesh, u), w)


def test_zero_function_norms(line):
    mesh = gd.build_mesh(line, 0.1, 20.0)
    f = GraphFunction.zeros(mesh)
    for kind in ("L2", "Linf", "H1"):
        assert gd.norm(f, kind) == 0.0
    assert gd.norm(f, "Lp", p=4) == 0.0
    psi = SpinorFunction.zeros(mesh)
    assert gd.norm(psi, "H1") == 0.0


def test_constant_on_single_edge():
    g = gd.parse_graph("graph g\nvertex a\nvertex b\nedge e a b 2.0\n")
    mesh = gd.build_mesh(g, 0.1, 10.0)
    f = GraphFunction(mesh, np.ones(mesh.n_u))
    assert gd.norm(f, "L2") == pytest.approx(np.sqrt(2.0), rel=1e-14)


def test_exponential_l2_on_halfline():
    g = gd.parse_graph("graph g\nvertex a\nhalfline h a\n")
    mesh = gd.build_mesh(g, 0.01, 20.0)
    f = GraphFunction.sample(mesh, lambda eid, x: np.exp(-x))
    # closed form: integral of e^(-2x) over [0, inf) is 1/2
    assert gd.norm(f, "L2") == pytest.approx(np.sqrt(0.5), abs=1e-3)


def test_quadrature_constant_on_triangle():
    g = gd.parse_graph(
        "graph t\nvertex a\nvertex b\nvertex c\nedge e1 a b 1\nedge e2 b c 2\nedge e3 c a 3\n"
    )
    mesh = gd.build_mesh(g, 0.1, 10.0)
    f = GraphFunction(mesh, np.ones(mesh.n_u))
    assert gd.quadrature(f) == pytest.approx(6.0, rel=1e-14)


def test_quadrature_exact_for_linear():
    g = gd.parse_graph("graph g\nvertex a\nvertex b\nedge e a b 1.0\n")
    mesh = gd.build_mesh(g, 0.1, 10.0)
    f = GraphFunction.sample(mesh, lambda eid, x: x)
    assert gd.quadrature(f) == pytest.approx(0.5, abs=1e-14)


def test_quadrature_sine():
    g = gd.parse_graph(f"graph g\nvertex a\nvertex b\nedge e a b {np.pi}\n")
    mesh = gd.build_mesh(g, 0.01, 10.0)
    f = GraphFunction.sample(mesh, lambda eid, x: np.sin(x))
    assert gd.quadrature(f) == pytest.approx(2.0, abs=1e-4)


def test_quadrature_linearity():
    mesh = gd.build_mesh(gd.line_graph(), 0.1, 15.0)
    rng = np.random.default_rng(0)
    f = GraphFunction(mesh, rng.standard_normal(mesh.n_u) + 1j * rng.standard_normal(mesh.n_u))
    g = GraphFunction(mesh, rng.standard_normal(mesh.n_u) + 1j * rng.standard_normal(mesh.n_u))
    a, b = 1.7 - 0.3j, -0.6 + 2.2j
    lhs = gd.quadrature(a * f + b * g)
    rhs = a * gd.quadrature(f) + b * gd.quadrature(g)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


def test_norm_homogeneity():
    mesh = gd.build_mesh(gd.line_graph(), 0.1, 15.0)
    rng = np.random.default_rng(1)
    for alpha in (2.5, -3.0, 0.125):
        f = GraphFunction(mesh, rng.standard_normal(mesh.n_u))
        psi = _random_spinor(mesh, rng)
        for obj in (f, psi):
            for kind, p in (("L2", None), ("Linf", None), ("H1", None), ("Lp", 4), ("Lp", 7)):
                n1 = gd.norm(alpha * obj if isinstance(obj, GraphFunction) else
                             SpinorFunction(alpha * obj.u, alpha * obj.w), kind, p)
                n0 = gd.norm(obj, kind, p)
                assert n1 == pytest.approx(abs(alpha) * n0, rel=1e-12)


def test_lp_approaches_linf():
    mesh = gd.build_mesh(gd.line_graph(), 0.05, 15.0)
    f = GraphFunction.sample(mesh, lambda eid, x: np.exp(-(x**2)))
    linf = gd.norm(f, "Linf")
    gaps = [abs(gd.norm(f, "Lp", p=p) - linf) for p in (2, 4, 8, 16, 32, 64, 128, 256)]
    assert gaps[-1] <= 0.05 * linf
    assert gaps[-1] < gaps[0]


def _gaussian_bump(eid, x):
    # offset so the profile is not even around the vertex of the line graph
    return np.exp(-((x - 1.0) ** 2)) if eid == "h1" else np.exp(-((x + 1.0) ** 2))


def test_norm_refinement_order():
    l2, h1 = [], []
    for h in (0.2, 0.1, 0.05, 0.025):
        mesh = gd.build_mesh(gd.line_graph(), h, 10.0)
        f = GraphFunction.sample(mesh, _gaussian_bump)
        l2.append(gd.norm(f, "L2"))
        h1.append(gd.norm(f, "H1"))
    # trapezoid superconverges for smooth decaying samples: L2 differences at roundoff
    assert np.all(np.abs(np.diff(l2)) <= 1e-10)
    # the derivative stencils carry the generic O(h^2)
    d = np.abs(np.diff(h1))
    orders = np.log2(d[:-1] / d[1:])
    assert np.all(orders >= 1.9)


def test_unknown_norm_kind():
    mesh = gd.build_mesh(gd.line_graph(), 0.1, 15.0)
    with pytest.raises(ValueError, match="norm kind"):
        gd.norm(GraphFunction.zeros(mesh), "L3000")


def test_signed_vertex_value_signs():
    g = gd.parse_graph("graph g\nvertex a\nvertex b\nedge e a b 1.0\n")
    mesh = gd.build_mesh(g, 0.1, 10.0)
    psi = SpinorFunction(GraphFunction.zeros(mesh), np.full(mesh.n_w, 3.0))
    assert gd.signed_vertex_value(psi, "e", "a") == pytest.approx(3.0)
    assert gd.signed_vertex_value(psi, "e", "b") == pytest.approx(-3.0)
    with pytest.raises(ValueError, match="incident"):
        gd.signed_vertex_value(psi, "e", "zz")


def test_signed_vertex_value_linear_extrapolation():
    g = gd.parse_graph("graph g\nvertex a\nvertex b\nedge e a b 1.0\n")
    mesh = gd.build_mesh(g, 0.1, 10.0)
    em = mesh.edges[0]
    w = np.zeros(mesh.n_w)
    w[em.w_start : em.w_start + em.n] = em.half_x()
    psi = SpinorFunction(GraphFunction.zeros(mesh), w)
    # extrapolating w(x) = x to x = 0 is exact for the linear profile
    assert gd.signed_vertex_value(psi, "e", "a") == pytest.approx(0.0, abs=1e-14)


def test_signed_vertex_value_flips_with_orientation():
    doc = "graph g\nvertex a\nvertex b\nedge e {} {} 1.0\n"
    values = []
    for va, vb in (("a", "b"), ("b", "a")):
        mesh = gd.build_mesh(gd.parse_graph(doc.format(va, vb)), 0.1, 10.0)
        psi = SpinorFunction(GraphFunction.zeros(mesh), np.full(mesh.n_w, 3.0))
        values.append(gd.signed_vertex_value(psi, "e", "a"))
    assert values[0] == -values[1]


def test_spinor_norm_combines_components():
    mesh = gd.build_mesh(gd.line_graph(), 0.1, 15.0)
    rng = np.random.default_rng(2)
    psi = _random_spinor(mesh, rng)
    nu = gd.norm(psi.u, "L2")
    nw = gd.w_component_norm(psi, "L2")
    assert gd.norm(psi, "L2") == pytest.approx(np.hypot(nu, nw), rel=1e-13)
    assert gd.norm(psi, "Linf") == max(np.abs(psi.u.values).max(), np.abs(psi.w).max())


def test_modulus_uses_adjacent_halfnodes():
    g = gd.parse_graph("graph g\nvertex a\nvertex b\nedge e a b 1.0\n")
    mesh = gd.build_mesh(g, 0.1, 10.0)
    psi = SpinorFunction(GraphFunction(mesh, np.full(mesh.n_u, 0.6)), np.full(mesh.n_w, 0.8))
    assert np.allclose(psi.modulus_at_nodes(), 1.0)


def test_mismatched_mesh_rejected(line):
    mesh1 = gd.build_mesh(line, 0.1, 15.0)
    mesh2 = gd.build_mesh(line, 0.1, 20.0)
    f = GraphFunction.zeros(mesh1)
    g2 = GraphFunction.zeros(mesh2)
    with pytest.raises(ValueError, match="different meshes"):
        f + g2
    with pytest.raises(ValueError, match="half-node"):
        SpinorFunction(f, np.zeros(mesh2.n_w))
