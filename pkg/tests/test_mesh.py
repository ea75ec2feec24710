import numpy as np
import pytest

import graphdirac as gd
from conftest import TRIANGLE_DOC


def test_line_graph_mesh_counts(line):
    mesh = gd.build_mesh(line, 0.1, 20.0)
    assert [em.n for em in mesh.edges] == [200, 200]
    # one shared vertex node, two Dirichlet truncation nodes
    assert mesh.n_u == 1 + 2 * 199 + 2
    assert mesh.n_w == 400
    assert len(mesh.dirichlet_u) == 2
    assert mesh.edges[0].u_idx[0] == mesh.edges[1].u_idx[0] == mesh.vertex_node["o"]


def test_edge_rounding_to_fit():
    g = gd.parse_graph("graph g\nvertex a\nvertex b\nedge e a b 1.05\n")
    mesh = gd.build_mesh(g, 0.1, 10.0)
    em = mesh.edges[0]
    assert em.n == 10
    assert em.h == pytest.approx(0.105, abs=1e-15)


def test_too_coarse_step_rejected():
    g = gd.parse_graph("graph g\nvertex a\nvertex b\nedge e a b 1.0\n")
    with pytest.raises(gd.MeshError, match="too coarse"):
        gd.build_mesh(g, 0.5, 10.0)


def test_truncation_length_floor(line):
    with pytest.raises(gd.MeshError, match="10"):
        gd.build_mesh(line, 0.1, 0.5)


def test_vertex_gluing_map():
    g = gd.parse_graph(TRIANGLE_DOC)
    mesh = gd.build_mesh(g, 0.1, 10.0)
    for em in mesh.edges:
        edge = mesh._graph_edge(em.edge_id)
        if em.kind == "bounded":
            assert em.u_idx[0] == mesh.vertex_node[edge.vertex_a]
            assert em.u_idx[-1] == mesh.vertex_node[edge.vertex_b]
        else:
            assert em.u_idx[0] == mesh.vertex_node[edge.anchor]
            assert em.u_idx[-1] in mesh.dirichlet_u


def test_quadrature_weights_sum_to_total_length():
    g = gd.parse_graph(TRIANGLE_DOC)
    mesh = gd.build_mesh(g, 0.1, 12.0)
    assert mesh.u_weight.sum() == pytest.approx(6.0 + 12.0, rel=1e-14)
    assert mesh.w_weight.sum() == pytest.approx(6.0 + 12.0, rel=1e-14)


def test_staggered_coordinates():
    g = gd.parse_graph("graph g\nvertex a\nvertex b\nedge e a b 1.0\n")
    mesh = gd.build_mesh(g, 0.25, 10.0)
    em = mesh.edges[0]
    assert np.allclose(em.node_x(), [0, 0.25, 0.5, 0.75, 1.0])
    assert np.allclose(em.half_x(), [0.125, 0.375, 0.625, 0.875])


def test_distances_from_vertex():
    g = gd.parse_graph(TRIANGLE_DOC)
    mesh = gd.build_mesh(g, 0.1, 10.0)
    d = mesh.u_node_distances("a")
    assert d[mesh.vertex_node["a"]] == 0.0
    assert d[mesh.vertex_node["b"]] == pytest.approx(1.0)
    # c is closer through a (length 3) than through b (1 + 2)
    assert d[mesh.vertex_node["c"]] == pytest.approx(3.0)
    em = mesh.edge_mesh("tail")
    assert d[em.u_idx[-1]] == pytest.approx(10.0)


def test_four_interval_edge_allowed():
    g = gd.parse_graph("graph g\nvertex a\nvertex b\nedge e a b 1.0\n")
    mesh = gd.build_mesh(g, 0.25, 10.0)
    assert mesh.edges[0].n == 4
