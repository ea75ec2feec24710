"""Pluggable nonlinearities with primitives and sampled hypothesis checks.

A model provides g(s) for s >= 0, its derivative, the primitive
G(s) = int_0^s g(t) t dt and the defect Ghat(s) = g(s) s^2 / 2 - G(s),
plus the structural metadata (growth exponent p, superquadraticity exponent
theta, defect exponent xi with constant c1 beyond radius R, growth constant
C1) that the sampled checks certify against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

# slack for checks whose mathematical statement holds with equality
_REL_SLACK = 1e-12

_WHICH = ("g", "gprime", "G", "Ghat")


@dataclass
class NonlinearityModel:
    """Nonlinearity defined by callables; closed forms preferred, fallbacks numeric.

    g_fn(s) is required.  gprime_fn falls back to central differences with
    step 1e-6*max(s, 1); G_fn falls back to adaptive quadrature of g(t)*t.
    """

    g_fn: object
    gprime_fn: object = None
    G_fn: object = None
    Ghat_fn: object = None
    p: float = 4.0
    theta: float = 4.0
    xi: float = 1.9
    R: float = 1.0
    c1: float = 0.25
    C1: float = 1.0
    name: str = "custom"

    def g(self, s):
        _require_nonneg(s)
        return self.g_fn(np.asarray(s, dtype=float))

    def gprime(self, s):
        _require_nonneg(s)
        s = np.asarray(s, dtype=float)
        if self.gprime_fn is not None:
            return self.gprime_fn(s)
        step = 1e-6 * np.maximum(s, 1.0)
        return (self.g_fn(s + step) - self.g_fn(np.maximum(s - step, 0.0))) / (
            step + np.minimum(s, step)
        )

    def G(self, s):
        _require_nonneg(s)
        s = np.asarray(s, dtype=float)
        if self.G_fn is not None:
            return self.G_fn(s)
        flat = np.atleast_1d(s).ravel()
        vals = np.array([quad(lambda t: self.g_fn(t) * t, 0.0, si)[0] for si in flat])
        return vals.reshape(np.shape(s)) if np.shape(s) else float(vals[0])

    def Ghat(self, s):
        _require_nonneg(s)
        s = np.asarray(s, dtype=float)
        if self.Ghat_fn is not None:
            return self.Ghat_fn(s)
        return 0.5 * self.g(s) * s**2 - self.G(s)


def _require_nonneg(s):
    if np.any(np.asarray(s) < 0.0):
        raise ValueError("nonlinearity arguments must be nonnegative")


class PowerLaw(NonlinearityModel):
    """g(s) = s^(p-2) with G(s) = s^p / p; satisfies all hypotheses for p in (2, 6).

    Metadata: theta = p; the defect lower bound holds with R = 1,
    c1 = 1/2 - 1/p for any xi in (0, 2); fixed at xi = 1.9.
    """

    def __init__(self, p):
        p = float(p)
        if not (2.0 < p < 6.0):
            raise ValueError("PowerLaw exponent p must lie in (2, 6)")
        super().__init__(
            g_fn=None,
            p=p,
            theta=p,
            xi=min(p, 1.9),
            R=1.0,
            c1=0.5 - 1.0 / p,
            C1=1.0,
            name=f"power-law p={p:g}",
        )

    def g(self, s):
        _require_nonneg(s)
        s = np.asarray(s, dtype=float)
        return s ** (self.p - 2.0)

    def gprime(self, s):
        _require_nonneg(s)
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (self.p - 2.0) * s ** (self.p - 3.0)
        return out

    def G(self, s):
        _require_nonneg(s)
        s = np.asarray(s, dtype=float)
        return s**self.p / self.p

    def Ghat(self, s):
        _require_nonneg(s)
        s = np.asarray(s, dtype=float)
        return (0.5 - 1.0 / self.p) * s**self.p


def eval_model(model, which, s):
    """Evaluate g, gprime, G or Ghat at s >= 0."""
    if which not in _WHICH:
        raise ValueError(f"unknown function {which!r}; expected one of {_WHICH}")
    fn = {"g": model.g, "gprime": model.gprime, "G": model.G, "Ghat": model.Ghat}[which]
    return fn(s)


def default_grid(lo=1e-4, hi=1e4, n=241):
    return np.geomspace(lo, hi, n)


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    witness: float = float("nan")
    detail: str = ""


@dataclass
class HypothesisReport:
    model_name: str
    checks: list = field(default_factory=list)

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def check_hypotheses(model, grid=None):
    """Sampled certificate of the structural hypotheses on a log grid.

    Checks, in order: C^1 smoothness of g (finite differences against the
    model derivative), vanishing at zero, the polynomial growth bound with
    exponent p, superquadraticity (Ambrosetti-Rabinowitz with exponent
    theta), and positivity plus the power lower bound of the defect Ghat.
    """
    if grid is None:
        grid = default_grid()
    grid = np.asarray(grid, dtype=float)
    if grid.size < 200:
        raise ValueError("hypothesis grid needs at least 200 points")
    checks = []

    g = model.g(grid)
    G = model.G(grid)
    Ghat = model.Ghat(grid)

    # g1: derivative consistency, relative step 1e-4*s
    step = 1e-4 * grid
    fd = (model.g(grid + step) - model.g(grid - step)) / (2.0 * step)
    gp = model.gprime(grid)
    scale = np.maximum(np.abs(gp), np.maximum(np.abs(g) / grid, 1e-30))
    bad = np.abs(fd - gp) > 1e-4 * scale
    checks.append(_verdict("smooth_g1", bad, grid, "finite differences disagree with gprime"))

    # g2: g(s) -> 0 as s -> 0 (heuristic threshold at the smallest sample)
    g_small = abs(float(np.abs(model.g(grid[0]))))
    g_one = abs(float(np.abs(model.g(1.0))))
    ok = g_small <= 1e-2 * g_one * (1.0 + _REL_SLACK) + 1e-300
    checks.append(
        HypothesisCheck(
            "vanishes_at_zero_g2",
            bool(ok),
            float("nan") if ok else float(grid[0]),
            "" if ok else f"|g({grid[0]:g})| = {g_small:g} not << |g(1)| = {g_one:g}",
        )
    )

    # g3: g(s) <= C1 (1 + s^(p-2))
    bound = model.C1 * (1.0 + grid ** (model.p - 2.0))
    bad = g > bound * (1.0 + _REL_SLACK)
    checks.append(_verdict("growth_g3", bad, grid, "g exceeds C1*(1+s^(p-2))"))

    # g4: 0 < theta*G(s) <= g(s)*s^2
    bad = ~(model.theta * G > 0.0) | (model.theta * G > g * grid**2 * (1.0 + _REL_SLACK) + 1e-300)
    checks.append(_verdict("superquadratic_g4", bad, grid, "theta*G not in (0, g*s^2]"))

    # g5: Ghat > 0, and Ghat >= c1*s^xi beyond R
    bad = ~(Ghat > 0.0)
    tail = grid >= model.R
    bad = bad | (tail & (Ghat < model.c1 * grid**model.xi * (1.0 - _REL_SLACK)))
    checks.append(_verdict("defect_g5", bad, grid, "Ghat not positive / below c1*s^xi"))

    return HypothesisReport(model.name, checks)


def _verdict(name, bad, grid, message):
    bad = np.asarray(bad)
    if bad.any():
        i = int(np.argmax(bad))
        return HypothesisCheck(name, False, float(grid[i]), f"{message} at s = {grid[i]:g}")
    return HypothesisCheck(name, True)


@dataclass
class GrowthBoundReport:
    found: bool
    constant: float
    witness: float = float("nan")
    detail: str = ""


def check_growth_bound(model, grid=None, cap=1e6):
    """Search a constant C > 0 with G(s) >= C*s^theta - C*s^2 on the grid."""
    if grid is None:
        grid = default_grid()
    grid = np.asarray(grid, dtype=float)
    G = np.asarray(model.G(grid), dtype=float)
    gap = grid**model.theta - grid**2
    pos = gap > 0.0
    if not pos.any():
        c = min(cap, 1.0)
    else:
        with np.errstate(divide="ignore"):
            ratios = G[pos] / gap[pos]
        c = float(min(cap, ratios.min() * (1.0 - _REL_SLACK)))
    if c <= 0.0:
        i = int(np.argmax(pos & (G <= 0.0))) if pos.any() else 0
        return GrowthBoundReport(False, 0.0, float(grid[i]), "no positive constant fits the grid")
    residual = G - c * gap
    bad = residual < -abs(c) * _REL_SLACK * np.maximum(np.abs(gap), 1.0)
    if bad.any():
        i = int(np.argmax(bad))
        return GrowthBoundReport(False, c, float(grid[i]), f"bound fails at s = {grid[i]:g}")
    return GrowthBoundReport(True, c)
