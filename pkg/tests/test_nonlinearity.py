import numpy as np
import pytest

import graphdirac as gd
from graphdirac.nonlinearity import NonlinearityModel, default_grid


def broken_negative():
    # g(s) = -s: smooth and vanishing at 0, but G < 0 breaks superquadraticity
    return NonlinearityModel(
        g_fn=lambda s: -np.asarray(s, dtype=float),
        gprime_fn=lambda s: -np.ones_like(np.asarray(s, dtype=float)),
        G_fn=lambda s: -np.asarray(s, dtype=float) ** 3 / 3.0,
        p=3.0,
        theta=3.0,
        name="negative",
    )


def broken_overgrown():
    # g(s) = s^6 declared with p = 4: violates the growth bound at large s
    return NonlinearityModel(
        g_fn=lambda s: np.asarray(s, dtype=float) ** 6,
        gprime_fn=lambda s: 6.0 * np.asarray(s, dtype=float) ** 5,
        G_fn=lambda s: np.asarray(s, dtype=float) ** 8 / 8.0,
        p=4.0,
        theta=8.0,
        name="overgrown",
    )


def test_power_law_values():
    m = gd.PowerLaw(4.0)
    assert gd.eval_model(m, "g", 2.0) == pytest.approx(4.0)
    assert gd.eval_model(m, "G", 2.0) == pytest.approx(4.0)
    assert gd.eval_model(m, "Ghat", 2.0) == pytest.approx(4.0)
    assert gd.eval_model(gd.PowerLaw(3.0), "g", 0.0) == 0.0


def test_ghat_definition_identity():
    for p in (2.5, 3.0, 4.0, 5.0):
        m = gd.PowerLaw(p)
        for s in (0.1, 1.0, 10.0):
            direct = gd.eval_model(m, "Ghat", s)
            derived = 0.5 * m.g(s) * s**2 - m.G(s)
            assert direct == pytest.approx(derived, abs=1e-8 * max(1.0, abs(derived)))


def test_negative_argument_rejected():
    with pytest.raises(ValueError, match="nonnegative"):
        gd.eval_model(gd.PowerLaw(4.0), "g", -1.0)
    with pytest.raises(ValueError, match="unknown function"):
        gd.eval_model(gd.PowerLaw(4.0), "whatever", 1.0)


def test_power_law_exponent_range():
    with pytest.raises(ValueError):
        gd.PowerLaw(2.0)
    with pytest.raises(ValueError):
        gd.PowerLaw(6.0)


@pytest.mark.parametrize("p", [2.5, 3.0, 4.0, 5.0])
def test_power_law_passes_all_hypotheses(p):
    report = gd.check_hypotheses(gd.PowerLaw(p))
    assert report.all_passed, [c for c in report.checks if not c.passed]


def test_short_grid_rejected():
    with pytest.raises(ValueError, match="200"):
        gd.check_hypotheses(gd.PowerLaw(4.0), grid=np.geomspace(1e-4, 1e4, 50))


def test_negative_model_fails_superquadraticity():
    report = gd.check_hypotheses(broken_negative())
    check = report["superquadratic_g4"]
    assert not check.passed
    assert np.isfinite(check.witness)
    # smoothness and smallness near zero are genuinely fine for g = -s
    assert report["smooth_g1"].passed
    assert report["vanishes_at_zero_g2"].passed


def test_overgrown_model_fails_growth():
    report = gd.check_hypotheses(broken_overgrown())
    check = report["growth_g3"]
    assert not check.passed
    # s^6 first exceeds 1 + s^2 just above s = 1
    assert 1.0 < check.witness < 2.0


def test_growth_bound_power_law():
    rep = gd.check_growth_bound(gd.PowerLaw(4.0))
    assert rep.found
    # the sharp constant on the grid approaches 1/p from above
    assert 0.2 < rep.constant <= 0.251
    rep3 = gd.check_growth_bound(gd.PowerLaw(3.0))
    assert rep3.found and rep3.constant <= 1.0


def test_growth_bound_zero_model():
    zero = NonlinearityModel(
        g_fn=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
        gprime_fn=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
        G_fn=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
        theta=4.0,
        name="zero",
    )
    assert not gd.check_growth_bound(zero).found


def test_primitive_derivative_consistency():
    # G'(s) = g(s) * s on the log grid
    grid = default_grid()[1:-1]
    for p in (2.5, 4.0):
        m = gd.PowerLaw(p)
        step = 1e-5 * grid
        fd = (m.G(grid + step) - m.G(grid - step)) / (2.0 * step)
        target = m.g(grid) * grid
        assert np.all(np.abs(fd - target) <= 1e-5 * np.maximum(np.abs(target), 1e-30))


def test_ghat_positive_and_scaling():
    m = gd.PowerLaw(3.5)
    grid = default_grid()
    assert np.all(m.Ghat(grid) > 0.0)
    s = np.array([0.3, 1.7, 9.0])
    assert np.allclose(m.G(2.0 * s), 2.0**3.5 * m.G(s), rtol=1e-12)


def test_numeric_fallbacks():
    # model given only g: primitive via quadrature, derivative via differences
    m = NonlinearityModel(g_fn=lambda s: np.asarray(s, dtype=float) ** 2, p=4.0, theta=4.0)
    assert m.G(2.0) == pytest.approx(4.0, rel=1e-9)
    assert float(m.gprime(3.0)) == pytest.approx(6.0, rel=1e-6)
    assert float(m.Ghat(2.0)) == pytest.approx(4.0, rel=1e-8)
