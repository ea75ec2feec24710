import numpy as np
import pytest

import graphdirac as gd

SQRT5 = np.sqrt(5.0)


# closed-form line soliton of -u'' + u = 0.4 u^3 (m = 0.2, nu = -1, quartic power)
def soliton(x):
    return SQRT5 / np.cosh(x)


def soliton_second_derivative(x):
    s = 1.0 / np.cosh(x)
    return SQRT5 * (s - 2.0 * s**3)


def soliton_ode_residual(x, m=0.2, nu=-1.0):
    u = soliton(x)
    return -soliton_second_derivative(x) - nu * u - 2.0 * m * u**3


TRIANGLE_DOC = """\
graph triangle
vertex a
vertex b
vertex c
edge e1 a b 1
edge e2 b c 2
edge e3 c a 3
halfline tail a
"""


@pytest.fixture(scope="session")
def line():
    return gd.line_graph()


@pytest.fixture(scope="session")
def star3():
    return gd.star_graph(3)


@pytest.fixture(scope="session")
def fine_line_mesh(line):
    return gd.build_mesh(line, 0.01, 30.0)


@pytest.fixture(scope="session")
def quartic():
    return gd.PowerLaw(4.0)


@pytest.fixture(scope="session")
def soliton_solve(fine_line_mesh, quartic):
    prob = gd.NlsProblem(fine_line_mesh, quartic, 0.2, -1.0)
    u, report = gd.solve_nls(prob)
    assert report.converged and not report.trivial_solution
    return u, prob, report


@pytest.fixture(scope="session")
def sweep(line, quartic):
    schedule = gd.make_schedule(0.2, -1.0, [4.0, 8.0, 16.0, 32.0])
    table = gd.run_limit_sweep(schedule, line, gd.MeshConfig(h=0.01), quartic)
    assert not table.partial, table.failure
    return table
