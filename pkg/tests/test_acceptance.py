"""Acceptance criteria, each at its stated tolerance and runtime budget.

Heavy computations live in module-scoped fixtures that record their own wall
time, so the multiplier cross-check can reuse every cycle without recomputing.
"""

import time

import numpy as np
import pytest

from lienard.bifurcate import StepPolicy, continue_cycle, hopf_scan, staircase_construct, staircase_place
from lienard.cubic import ORIGIN, RIGHT, analyze_distribution, big_cycle_search, perturbed_double_hopf, sweep_distributions
from lienard.cycles import Displacement, anchor_of, count_sign_changes, find_cycles, grid_points
from lienard.integrate import IntegratorConfig, make_section
from lienard.polysys import ParamPolynomial, build_canonical, build_cubic, build_lienard, build_rychkov, classify_infinity, find_equilibria
from lienard.rotation import INDEFINITE, rotation_determinant, semidefinite_verdict

pytestmark = pytest.mark.acceptance

RYCHKOV_A = {"mu1": -0.001, "mu3": 0.1, "mu5": -1.0}


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def brute_force_sign_changes(sys, a, report, factor: int = 10, base: int = 64) -> int:
    """Sign changes of the displacement on a grid ``factor`` times finer than the scan."""
    sec = report.section
    disp = Displacement(sys, a, sec)
    pts = grid_points(sec, factor * base, "geometric", anchor_of(sys, disp.a, sec))
    vals = [r.displacement for r in map(disp.sample, pts) if r.ok]
    return count_sign_changes(vals)


def y_power(n: int) -> ParamPolynomial:
    return ParamPolynomial.monomial(0, n)


def report(label: str, **values):
    print(f"[{label}] " + ", ".join(f"{k}={v}" for k, v in values.items()))


# ---------------------------------------------------------------------------
# shared computations


@pytest.fixture(scope="module")
def staircase_k1():
    return timed(staircase_construct, 1)


@pytest.fixture(scope="module")
def staircase_k2():
    return timed(staircase_construct, 2, shape="rychkov")


@pytest.fixture(scope="module")
def rychkov_branch():
    def run():
        seed = find_cycles(build_rychkov(), RYCHKOV_A, (0.0, 10.0)).cycles[1]
        return continue_cycle(build_rychkov(), RYCHKOV_A, "mu3", 0.0, seed, StepPolicy(initial=0.005, max_step=0.02))

    return timed(run)


@pytest.fixture(scope="module")
def monotone_branches():
    def run():
        sys = build_canonical(1)
        a = {"mu1": 0.2, "mu3": -2.0}
        seed = find_cycles(sys, a, (0.0, 10.0)).cycles[0]
        coarse = continue_cycle(sys, a, "mu3", -0.5, seed, StepPolicy(initial=0.05, max_step=0.05))
        fine = continue_cycle(sys, a, "mu3", -0.5, seed, StepPolicy(initial=0.0125, max_step=0.0125))
        return coarse, fine

    return timed(run)


# ---------------------------------------------------------------------------


def test_criterion_01_rotation_determinants():
    t0 = time.perf_counter()
    mismatches = []
    for k in range(1, 6):
        canonical = build_canonical(k)
        for i in range(k + 1):
            name = f"mu{2 * i + 1}"
            d = rotation_determinant(canonical, name)
            if d != y_power(2):
                mismatches.append(f"k={k} {name}: {d.to_text()}")
        general = build_lienard(k)
        for i in range(1, k + 1):
            d = rotation_determinant(general, f"mu{2 * i}")
            assert d == y_power(2 * i + 1)
            assert semidefinite_verdict(d).verdict == INDEFINITE
    elapsed = time.perf_counter() - t0
    report("criterion 1", seconds=f"{elapsed:.3f}", odd_mismatches=len(mismatches))
    assert elapsed < 1.0
    assert not mismatches, "odd parameters whose determinant is not y^2: " + "; ".join(mismatches)


def test_criterion_02_center_suite():
    t0 = time.perf_counter()
    cfg = IntegratorConfig(rtol=1e-11, atol=1e-13)
    pts = np.geomspace(8e-4, 0.8, 20)
    for k in (1, 2, 3):
        sys = build_lienard(k, [0] * (k + 1), [1] * k)
        disp = Displacement(sys, None, make_section(sys, None, (0.0, 1.0)), cfg)
        samples = [disp.sample(s) for s in pts]
        assert all(r.ok for r in samples)
        worst = max(abs(r.displacement) for r in samples)
        report("criterion 2", k=k, max_displacement=f"{worst:.2e}")
        assert worst <= 1e-8
    assert time.perf_counter() - t0 < 60


def test_criterion_03_hopf_exactness():
    t0 = time.perf_counter()
    for k in (1, 2, 3):
        rest = {f"mu{2 * i + 1}": -1.0 for i in range(1, k + 1)}
        hs = hopf_scan(build_canonical(k), rest, "mu1", (-0.5, 0.3), steps=40)
        assert len(hs) == 1 and hs[0].location == (0.0, 0.0)
        assert abs(hs[0].value) <= 1e-10
    cubic = build_cubic()
    lam, mu, alpha = 0.3, 0.2, -0.1
    hs = hopf_scan(cubic, {"mu": mu, "alpha": alpha}, "lambda", (-1.0, 1.0), steps=40, region=(-1, 3, -1, 1))
    at_origin = [h for h in hs if h.location == ORIGIN]
    assert len(at_origin) == 1 and abs(at_origin[0].value - mu) <= 1e-10
    hs = hopf_scan(cubic, {"lambda": lam, "mu": mu}, "alpha", (-1.0, 1.0), steps=40, region=(-1, 3, -1, 1))
    at_right = [h for h in hs if h.location == RIGHT]
    assert len(at_right) == 1 and abs(at_right[0].value + (lam + mu) / 4) <= 1e-10
    elapsed = time.perf_counter() - t0
    report("criterion 3", seconds=f"{elapsed:.3f}")
    assert elapsed < 1.0


def test_criterion_04_staircase_k1(staircase_k1):
    (res, elapsed), t0 = staircase_k1, time.perf_counter()
    assert res.success and res.count == 1
    c = res.cycles[0]
    assert c.stability == "stable" and c.multiplicity == "simple"
    assert c.signature == ((0.0, 0.0),)
    sys = res.system
    assert brute_force_sign_changes(sys, res.assignment, res.report) == 1
    for a in ({"mu1": 0.1, "mu3": 0.1}, {"mu1": -0.1, "mu3": -1.0}):
        rep = find_cycles(sys, a, (0.0, 10.0))
        assert rep.count == 0
        assert brute_force_sign_changes(sys, a, rep) == 0
    total = elapsed + time.perf_counter() - t0
    report("criterion 4", amplitude=f"{c.amplitude:.6f}", multiplier=f"{c.multiplier:.6f}", seconds=f"{total:.2f}")
    assert total < 60


def test_criterion_05_rychkov_two_cycles(staircase_k2):
    (res, elapsed), t0 = staircase_k2, time.perf_counter()
    assert res.success and res.count == 2
    assert dict(res.assignment) == RYCHKOV_A
    inner, outer = res.cycles
    assert inner.amplitude < outer.amplitude
    assert (inner.multiplier - 1) * (outer.multiplier - 1) < 0
    assert brute_force_sign_changes(res.system, res.assignment, res.report) == 2
    total = elapsed + time.perf_counter() - t0
    report("criterion 5", amplitudes=[round(c.amplitude, 6) for c in res.cycles],
           multipliers=[round(c.multiplier, 6) for c in res.cycles], seconds=f"{total:.2f}")
    assert total <= 600


def test_extended_05_staircase_k3():
    t0 = time.perf_counter()
    res = staircase_place((0.2, 0.4, 0.6))
    assert res.success and res.count == 3
    sides = [np.sign(c.multiplier - 1) for c in res.cycles]
    assert sides[0] * sides[1] < 0 and sides[1] * sides[2] < 0
    assert brute_force_sign_changes(res.system, res.assignment, res.report) == 3
    total = time.perf_counter() - t0
    report("extended 5", amplitudes=[round(c.amplitude, 4) for c in res.cycles],
           multipliers=[round(c.multiplier, 4) for c in res.cycles], seconds=f"{total:.2f}")
    assert total <= 600


def test_criterion_06_fold(rychkov_branch):
    br, elapsed = rychkov_branch
    assert br.event == "fold"
    f = br.fold
    assert abs(f.multiplier - 1) <= 1e-3
    assert abs(f.side_counts[0] - f.side_counts[1]) == 2
    report("criterion 6", mu3=f"{f.value:.7f}", s=f"{f.s:.6f}", multiplier=f"{f.multiplier:.9f}",
           side_counts=f.side_counts, seconds=f"{elapsed:.2f}")
    assert elapsed <= 600


def test_criterion_07_monotone_family(monotone_branches):
    (coarse, fine), elapsed = monotone_branches
    for br in (coarse, fine):
        assert br.event == "range-end"
        assert br.is_monotone() and np.all(np.diff(br.amplitudes) > 0)
    assert len(fine.samples) >= 3 * len(coarse.samples)
    pc = np.array([p for p, _ in coarse.samples])
    pf = np.array([p for p, _ in fine.samples])
    drift = np.abs(np.interp(pc, pf, fine.amplitudes) - coarse.amplitudes) / coarse.amplitudes
    report("criterion 7", coarse_points=len(pc), fine_points=len(pf), max_rel_drift=f"{drift.max():.2e}",
           seconds=f"{elapsed:.2f}")
    assert drift.max() <= 1e-3
    assert elapsed <= 300


def test_criterion_08_multiplier_cross_check(staircase_k1, staircase_k2, rychkov_branch, monotone_branches):
    cycles = list(staircase_k1[0].cycles) + list(staircase_k2[0].cycles)
    cycles += [c for _, c in rychkov_branch[0].samples]
    for br in monotone_branches[0]:
        cycles += [c for _, c in br.samples]
    simple = [c for c in cycles if c.multiplicity == "simple"]
    worst = max(abs(c.multiplier - c.multiplier_fd) / abs(c.multiplier) for c in simple)
    report("criterion 8", cycles=len(simple), worst_relative=f"{worst:.2e}")
    assert len(simple) >= 4
    assert worst <= 1e-3


def test_criterion_09_cubic_structure():
    t0 = time.perf_counter()
    cubic = build_cubic()
    for lam, mu, alpha in [(0, 0, 0), (0.3, -0.2, 0.1), (-1, 2, 0.5), (0.99, 1.0, -0.5)]:
        eqs = find_equilibria(cubic, {"lambda": lam, "mu": mu, "alpha": alpha}, (-10, 10, -10, 10))
        assert [e.location for e in eqs] == [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]
        assert [e.is_antisaddle for e in eqs] == [True, False, True]
        assert eqs[1].classification == "saddle"
    r0 = analyze_distribution(0.0, 0.0, 0.0)
    assert r0.distribution.as_tuple() == ((0, 0), 0)
    assert r0.center_candidates == [ORIGIN, RIGHT]
    out = perturbed_double_hopf()
    assert out.found and out.result.distribution.as_tuple() == ((1, 1), 0)
    elapsed = time.perf_counter() - t0
    report("criterion 9", double_hopf_point=out.result.parameters, seconds=f"{elapsed:.2f}")
    assert elapsed <= 600


def test_extended_09_three_cycles():
    out, elapsed = timed(big_cycle_search)
    d = out.result.distribution if out.result else None
    report("extended 9", found=out.found, parameters=out.result.parameters if out.result else None,
           distribution=d, note=out.note or "-", seconds=f"{elapsed:.2f}")
    assert out.found and d.nbig >= 1 and d.total >= 3 and d.in_listed


def test_criterion_10_infinity():
    t0 = time.perf_counter()
    for k in range(1, 6):
        for sign in (1.0, -1.0):
            a = {f"mu{i}": (0.5 if i % 2 == 0 else sign * (i + 1) / 3) for i in range(1, 2 * k + 2)}
            kinds = {s.direction: s.type for s in classify_infinity(build_lienard(k), a)}
            assert kinds == {(1.0, 0.0): "saddle", (0.0, 1.0): "node"}
    elapsed = time.perf_counter() - t0
    report("criterion 10", seconds=f"{elapsed:.3f}")
    assert elapsed < 1.0


def test_criterion_11_bound_probe():
    axis = list(np.linspace(-0.2, 0.2, 5))
    res, elapsed = timed(sweep_distributions, axis, axis, axis)
    assert len(res.cells) == 125
    assert res.silent_anomalies() == []
    for c in res.cells:
        assert c.distribution.in_listed or c.flags
        if c.distribution.total > 3:
            assert "exceeds cycle bound" in c.flags
    report("criterion 11", summary={k: v["count"] for k, v in res.summary().items()}, seconds=f"{elapsed:.1f}")
    assert elapsed <= 1800
