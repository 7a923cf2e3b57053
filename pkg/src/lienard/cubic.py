"""Cycle distributions of the generalized cubic Lienard system.

``x' = y, y' = -x + (lam - mu) y + 3/2 x^2 + mu x y - 1/2 x^3 + alpha x^2 y``
has a saddle at ``(1, 0)`` and anti-saddles at ``(0, 0)`` and ``(2, 0)`` for
every parameter value.  Cycles are counted on three x-axis sections and
bucketed by which equilibria they wind around.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .cycles import LimitCycle, fine_focus_order, find_cycles
from .errors import LienardError
from .integrate import IntegratorConfig, make_section
from .polysys import ParameterAssignment, build_cubic, find_equilibria

LISTED_DISTRIBUTIONS = (((1, 1), 1), ((1, 2), 0), ((2, 1), 0), ((1, 0), 2), ((0, 1), 2))
CYCLE_BOUND = 3

ORIGIN, SADDLE, RIGHT = (0.0, 0.0), (1.0, 0.0), (2.0, 0.0)
SIG_N0 = (ORIGIN,)
SIG_N2 = (RIGHT,)
SIG_BIG = (ORIGIN, SADDLE, RIGHT)

SYSTEM = build_cubic()


def assignment(lam: float, mu: float, alpha: float) -> ParameterAssignment:
    return ParameterAssignment({"lambda": float(lam), "mu": float(mu), "alpha": float(alpha)})


def double_hopf_locus(mu: float) -> tuple[float, float]:
    """``(lambda, alpha)`` making both anti-saddles weak foci: ``(mu, -mu/2)``."""
    return float(mu), -float(mu) / 2


@dataclass(frozen=True)
class Distribution:
    n0: int
    n2: int
    nbig: int

    def as_tuple(self) -> tuple[tuple[int, int], int]:
        return (self.n0, self.n2), self.nbig

    @property
    def total(self) -> int:
        return self.n0 + self.n2 + self.nbig

    @property
    def in_listed(self) -> bool:
        return self.as_tuple() in LISTED_DISTRIBUTIONS

    @property
    def below_listed(self) -> bool:
        """Componentwise dominated by some listed distribution."""
        return any(self.n0 <= a and self.n2 <= b and self.nbig <= c for (a, b), c in LISTED_DISTRIBUTIONS)

    def __str__(self):
        return f"(({self.n0},{self.n2}),{self.nbig})"


@dataclass
class DistributionResult:
    parameters: tuple[float, float, float]
    distribution: Distribution
    cycles: list[LimitCycle]
    flags: list[str] = field(default_factory=list)
    center_candidates: list[tuple[float, float]] = field(default_factory=list)
    anomalous: list[LimitCycle] = field(default_factory=list)
    escapes: int = 0
    unresolved: int = 0
    semistable: int = 0

    @property
    def diagnostics(self) -> dict:
        return {
            "escapes": self.escapes,
            "unresolved": self.unresolved,
            "semistable_candidates": self.semistable,
            "anomalous": len(self.anomalous),
        }


def _same_orbit(c1: LimitCycle, c2: LimitCycle, rel: float = 1e-6) -> bool:
    return c1.signature == c2.signature and abs(c1.period - c2.period) <= rel * max(c1.period, c2.period)


def analyze_distribution(
    lam: float,
    mu: float,
    alpha: float,
    config: IntegratorConfig | None = None,
    grid=(64, "geometric"),
    x_max: float = 12.0,
) -> DistributionResult:
    """Count cycles on ``(0,1)``, ``(1,2)`` and ``(2, x_max)`` and bucket them by enclosure."""
    cfg = config or IntegratorConfig()
    a = assignment(lam, mu, alpha)
    sections = {
        "S0": make_section(SYSTEM, a, (0.0, 1.0)),
        "S2": make_section(SYSTEM, a, (1.0, 2.0)),
        "Sbig": make_section(SYSTEM, a, (2.0, min(float(x_max), 12.0))),
    }
    orbits: list[LimitCycle] = []
    res = DistributionResult((float(lam), float(mu), float(alpha)), Distribution(0, 0, 0), [])
    for name, sec in sections.items():
        rep = find_cycles(SYSTEM, a, sec, grid, cfg)
        if rep.center_candidate:
            res.center_candidates.append(ORIGIN if name == "S0" else RIGHT)
        if rep.truncated is not None and rep.truncated.outcome == "escape":
            res.escapes += 1
        res.semistable += len(rep.semistable)
        for c in rep.cycles:
            if c.multiplicity == "unresolved":
                res.unresolved += 1
            if not any(_same_orbit(c, o) for o in orbits):
                orbits.append(c)
    res.center_candidates = sorted(set(res.center_candidates))
    n0 = n2 = nbig = 0
    for c in orbits:
        sig = c.signature
        if sig == SIG_N0:
            n0 += 1
        elif sig == SIG_N2:
            n2 += 1
        elif sig == SIG_BIG:
            nbig += 1
        else:
            res.anomalous.append(c)
    res.cycles = sorted(orbits, key=lambda c: (c.signature, c.period))
    res.distribution = Distribution(n0, n2, nbig)
    if res.distribution.total > CYCLE_BOUND:
        res.flags.append("exceeds cycle bound")
    if not res.distribution.in_listed:
        res.flags.append("outside distribution list")
    if res.anomalous:
        res.flags.append("anomalous signature")
    return res


# ---------------------------------------------------------------------------
# double-Hopf seeding


@dataclass
class SearchOutcome:
    target: str
    found: bool
    result: DistributionResult | None
    tried: list[tuple[tuple[float, float, float], str]]
    note: str = ""


def focus_signs(mu: float, config: IntegratorConfig | None = None) -> dict[tuple[float, float], int]:
    """Leading displacement sign of each weak focus on the double-Hopf locus."""
    cfg = config or IntegratorConfig()
    lam0, al0 = double_hopf_locus(mu)
    a0 = assignment(lam0, mu, al0)
    eqs = {e.location: e for e in find_equilibria(SYSTEM, a0, (-1.0, 3.0, -1.0, 1.0))}
    return {loc: fine_focus_order(SYSTEM, a0, eqs[loc], cfg).leading_sign for loc in (ORIGIN, RIGHT)}


def double_hopf_point(mu: float, eps: float, signs: dict) -> tuple[float, float, float]:
    """Perturb both traces by ``eps`` against the weak-focus signs.

    A stable weak focus is made linearly unstable (and vice versa) so that
    one small cycle is born around each anti-saddle.
    """
    t0 = -signs[ORIGIN] * eps
    t2 = -signs[RIGHT] * eps
    # trace(0,0) = lam - mu, trace(2,0) = lam + mu + 4 alpha
    lam = mu + t0
    return lam, float(mu), (t2 - lam - mu) / 4


def perturbed_double_hopf(
    mus: Sequence[float] = (-1.0, -0.5, 1.0, 0.5),
    eps_ladder: Sequence[float] = (1e-2, 5e-3, 2e-2),
    config: IntegratorConfig | None = None,
    grid=(64, "geometric"),
) -> SearchOutcome:
    """Search near the double-Hopf locus for a ``((1,1),0)`` point."""
    cfg = config or IntegratorConfig()
    tried = []
    for mu in mus:
        signs = focus_signs(mu, cfg)
        if 0 in signs.values():
            continue
        for eps in eps_ladder:
            p = double_hopf_point(mu, eps, signs)
            r = analyze_distribution(*p, cfg, grid)
            tried.append((p, str(r.distribution)))
            if r.distribution.as_tuple() == ((1, 1), 0):
                return SearchOutcome("((1,1),0)", True, r, tried)
    return SearchOutcome("((1,1),0)", False, None, tried, "no perturbation in the ladder produced ((1,1),0)")


def big_cycle_search(
    mus: Sequence[float] = (1.0, 0.5, -1.0),
    eps: float = 1e-2,
    alpha_offsets: Sequence[float] = (-0.01, -0.02, -0.05, 0.01, 0.02, 0.05),
    config: IntegratorConfig | None = None,
    grid=(64, "geometric"),
) -> SearchOutcome:
    """Double-Hopf seed followed by an alpha ladder, looking for three cycles with ``nbig >= 1``.

    Reports the richest distribution seen when the target is not reached.
    """
    cfg = config or IntegratorConfig()
    tried = []
    best = None
    for mu in mus:
        signs = focus_signs(mu, cfg)
        if 0 in signs.values():
            continue
        lam, mu_, alpha = double_hopf_point(mu, eps, signs)
        for off in (0.0, *alpha_offsets):
            r = analyze_distribution(lam, mu_, alpha + off, cfg, grid)
            tried.append(((lam, mu_, alpha + off), str(r.distribution)))
            d = r.distribution
            if best is None or (d.nbig, d.total) > (best.distribution.nbig, best.distribution.total):
                best = r
            if d.nbig >= 1 and d.total >= 3:
                return SearchOutcome("three cycles", True, r, tried)
    note = f"best distribution {best.distribution}" if best else "no usable seed"
    return SearchOutcome("three cycles", False, best, tried, note)


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepCell:
    parameters: tuple[float, float, float]
    distribution: Distribution
    flags: tuple[str, ...]
    diagnostics: tuple[tuple[str, int], ...]
    error: str = ""


@dataclass
class SweepResult:
    cells: list[SweepCell]

    def summary(self) -> dict[str, dict]:
        out: dict[str, dict] = {}
        for c in self.cells:
            key = str(c.distribution) if not c.error else "error"
            entry = out.setdefault(key, {"count": 0, "representative": c.parameters, "flags": sorted(set(c.flags))})
            entry["count"] += 1
        return dict(sorted(out.items()))

    def silent_anomalies(self) -> list[SweepCell]:
        """Cells outside the listed distributions that carry no flag."""
        return [c for c in self.cells if not c.error and not c.distribution.in_listed and not c.flags]


def _cell(args) -> SweepCell:
    (lam, mu, alpha), cfg, grid, x_max = args
    try:
        r = analyze_distribution(lam, mu, alpha, cfg, grid, x_max)
        return SweepCell((lam, mu, alpha), r.distribution, tuple(r.flags), tuple(sorted(r.diagnostics.items())))
    except LienardError as exc:
        return SweepCell((lam, mu, alpha), Distribution(0, 0, 0), ("analysis error",), (), str(exc))


def sweep_distributions(
    lams: Iterable[float],
    mus: Iterable[float],
    alphas: Iterable[float],
    config: IntegratorConfig | None = None,
    grid=(64, "geometric"),
    x_max: float = 12.0,
    workers: int = 1,
) -> SweepResult:
    """Evaluate every cell of the product grid in a fixed order; never aborts."""
    cfg = config or IntegratorConfig.sweep()
    cells = [(tuple(float(v) for v in p), cfg, grid, x_max) for p in product(lams, mus, alphas)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            out = list(ex.map(_cell, cells))
    else:
        out = [_cell(c) for c in cells]
    return SweepResult(out)
