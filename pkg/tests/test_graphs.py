import pytest

import graphdirac as gd
from conftest import TRIANGLE_DOC


def test_parse_line_graph():
    g = gd.parse_graph("graph line\nvertex o\nhalfline h1 o\nhalfline h2 o\n")
    assert g.vertices == ("o",)
    assert len(g.halflines) == 2 and not g.bounded_edges
    assert not g.is_compact
    assert g.degree("o") == 2


def test_parse_star():
    g = gd.star_graph(3)
    assert len(g.halflines) == 3
    assert g.max_degree_vertex() == "o"


def test_parse_comments_and_order():
    g = gd.parse_graph("# header\nhalfline h v1  # trailing\ngraph g\nvertex v1\n")
    assert g.name == "g" and g.halflines[0].anchor == "v1"


def test_dangling_vertex_reference():
    with pytest.raises(gd.GraphParseError, match="v9"):
        gd.parse_graph("graph g\nvertex a\nedge e a v9 1.0\n")


def test_nonpositive_length():
    with pytest.raises(gd.GraphError, match="length"):
        gd.parse_graph("graph g\nvertex a\nvertex b\nedge e a b 0\n")


def test_duplicate_ids():
    with pytest.raises(gd.GraphError, match="duplicate"):
        gd.parse_graph("graph g\nvertex a\nvertex a\n")
    with pytest.raises(gd.GraphError, match="duplicate"):
        gd.parse_graph("graph g\nvertex a\nvertex b\nedge e a b 1\nhalfline e a\n")


def test_disconnected_graph():
    with pytest.raises(gd.GraphError, match="connected"):
        gd.parse_graph("graph g\nvertex a\nvertex b\nhalfline h1 a\nhalfline h2 b\n")


def test_syntax_error_reports_line():
    with pytest.raises(gd.GraphParseError, match="line 3"):
        gd.parse_graph("graph g\nvertex a\nedge broken\n")


def test_unknown_keyword():
    with pytest.raises(gd.GraphParseError, match="unknown keyword"):
        gd.parse_graph("node a\n")


def test_self_loop_and_multi_edge_allowed():
    g = gd.parse_graph(
        "graph g\nvertex a\nvertex b\nedge l a a 1.0\nedge p1 a b 1\nedge p2 a b 2\n"
    )
    assert g.degree("a") == 4


def test_compact_core_star_of_halflines(star3):
    core = gd.compact_core(star3)
    assert core.total_length == 0.0 and not core.bounded_edges


def test_compact_core_triangle_plus_halfline():
    g = gd.parse_graph(TRIANGLE_DOC)
    core = gd.compact_core(g)
    assert core.total_length == 6.0
    assert len(core.bounded_edges) == 3


def test_compact_core_single_edge():
    g = gd.parse_graph("graph g\nvertex a\nvertex b\nedge e a b 2.5\n")
    assert g.is_compact
    assert gd.compact_core(g).total_length == 2.5


def test_format_parse_round_trip():
    g = gd.parse_graph(TRIANGLE_DOC)
    assert gd.parse_graph(gd.format_graph(g)) == g
    h = gd.parse_graph("graph g\nvertex a\nvertex b\nedge e a b 1.0499999999999998\n")
    assert gd.parse_graph(gd.format_graph(h)) == h
