import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lienard.cycles import (
    Displacement,
    count_sign_changes,
    enclosure,
    find_cycles,
    fine_focus_order,
    grid_points,
    noise_floor,
    return_map,
)
from lienard.errors import InputError
from lienard.integrate import IntegratorConfig, Section, make_section
from lienard.polysys import build_canonical, build_cubic, build_lienard, build_rychkov, find_equilibria


def averaged_amplitudes(odd: list[float]) -> list[float]:
    """Positive roots of the first-order averaged amplitude equation.

    For ``y' = -x + sum c_{2i+1} y^{2i+1}`` with small coefficients the radial
    drift is ``sum c_{2i+1} r^{2i+1} <sin^{2i+2}>``.
    """
    weights = [math.comb(2 * i + 2, i + 1) / 4 ** (i + 1) for i in range(len(odd))]
    coeffs = [c * w for c, w in zip(odd, weights)]  # polynomial in u = r^2
    roots = np.roots(coeffs[::-1])
    return sorted(math.sqrt(r.real) for r in roots if abs(r.imag) < 1e-12 and r.real > 0)


def test_linear_focus_displacement():
    sys = build_lienard(1, ["m", 0], [0])
    m = 0.02
    omega = math.sqrt(1 - m * m / 4)
    growth = math.exp(m * math.pi / omega)
    sec = make_section(sys, {"m": m}, (0.0, 5.0))
    for s in (0.01, 0.3, 1.7):
        r = return_map(sys, {"m": m}, sec, s)
        assert r.ok
        assert r.displacement == pytest.approx(s * (growth - 1), rel=1e-8)
        assert math.exp(r.divergence_integral) == pytest.approx(growth**2, rel=1e-8)


def test_return_map_rejects_points_outside_section():
    sys = build_rychkov()
    a = {"mu1": -0.001, "mu3": 0.1, "mu5": -1.0}
    sec = make_section(sys, a, (0.0, 10.0))
    with pytest.raises(InputError):
        return_map(sys, a, sec, 11.0)


def test_rychkov_two_cycles_match_averaging():
    sys = build_rychkov()
    odd = [-0.001, 0.1, -1.0]
    a = dict(zip(("mu1", "mu3", "mu5"), odd))
    rep = find_cycles(sys, a, (0.0, 10.0))
    assert [c.stability for c in rep.cycles] == ["unstable", "stable"]
    expected = averaged_amplitudes(odd)
    for c, r in zip(rep.cycles, expected):
        assert c.s == pytest.approx(r, rel=1e-3)
        assert c.multiplicity == "simple"
        assert c.multiplier_disagreement < 1e-6
        assert c.signature == ((0.0, 0.0),)
        assert abs(c.displacement) < 1e-10


def test_weakly_nonlinear_cycle_and_multiplier():
    # y' = -x + a y + b y^3: r^2 = -4a/(3b), multiplier ~ exp(-2 pi a)
    a_, b_ = 0.01, -1.0
    sys = build_lienard(1, None, [0])
    rep = find_cycles(sys, {"mu1": a_, "mu2": 0.0, "mu3": b_}, (0.0, 10.0))
    assert len(rep.cycles) == 1
    c = rep.cycles[0]
    assert c.s == pytest.approx(math.sqrt(-4 * a_ / (3 * b_)), rel=1e-2)
    assert c.multiplier == pytest.approx(math.exp(-2 * math.pi * a_), rel=1e-3)
    assert c.stability == "stable"
    assert c.period == pytest.approx(2 * math.pi, rel=1e-3)


def test_no_cycles_with_same_sign_coefficients():
    rep = find_cycles(build_canonical(1), {"mu1": 0.1, "mu3": 1.0}, (0.0, 10.0))
    assert rep.cycles == []
    assert rep.truncated is not None and rep.truncated.outcome == "escape"


def test_center_flag_for_reversible_system():
    sys = build_lienard(1, [0, 0], None)
    rep = find_cycles(sys, {"mu2": 1.0}, (0.0, 0.8), 20)
    assert rep.center_candidate
    assert rep.cycles == []


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=2, max_size=2), st.floats(0.01, 0.8))
def test_reversible_systems_have_zero_displacement(even, s):
    sys = build_lienard(2, [0, 0, 0], None)
    a = {"mu2": even[0], "mu4": even[1]}
    cfg = IntegratorConfig(rtol=1e-11, atol=1e-13)
    disp = Displacement(sys, a, make_section(sys, a, (0.0, 5.0)), cfg)
    r = disp.sample(s)
    if r.ok:  # large even terms can push orbits to infinity
        assert abs(r.displacement) <= noise_floor(cfg, s, r.period)


def test_grid_points_order_and_range():
    sec = Section(1.0, 2.0, 1)
    g = grid_points(sec, 16, anchor=2.0)
    assert np.all(np.diff(g) < 0)
    assert 1.0 < g.min() and g.max() < 2.0
    g2 = grid_points(sec, 16, "linear")
    assert np.all(np.diff(g2) > 0)
    with pytest.raises(InputError):
        grid_points(sec, 4)


def test_enclosure():
    th = np.linspace(0, 2 * np.pi, 500)
    orbit = np.c_[3 * np.cos(th) + 1, np.sin(th)]
    assert enclosure(orbit, [(0, 0), (1, 0), (2, 0), (5, 0)]) == [1, 1, 1, 0]
    with pytest.raises(InputError):
        enclosure(orbit, [(4.0, 0.0)])


def test_sign_changes():
    assert count_sign_changes([1, -1, -2, 3, 0, 4]) == 2


def test_cubic_conservative_centers():
    sys = build_cubic()
    a = {"lambda": 0.0, "mu": 0.0, "alpha": 0.0}
    for interval in ((0.0, 1.0), (1.0, 2.0)):
        rep = find_cycles(sys, a, interval)
        assert rep.center_candidate


@pytest.mark.parametrize(
    "odd, order, sign",
    [
        ([0.0, -1.0], 1, -1),
        ([0.0, 1.0], 1, 1),
        ([0.0, 0.0, -1.0], 2, -1),
    ],
)
def test_fine_focus_order_lienard(odd, order, sign):
    k = len(odd) - 1
    sys = build_lienard(k, odd, [0] * k)
    eq = find_equilibria(sys, None)[0]
    est = fine_focus_order(sys, None, eq)
    assert est.order == order
    assert est.leading_sign == sign
    assert est.fit_exponent == pytest.approx(2 * order + 1, abs=0.15)


def test_fine_focus_needs_zero_trace():
    sys = build_lienard(1, [0.1, -1], [0])
    with pytest.raises(InputError):
        fine_focus_order(sys, None, find_equilibria(sys, None)[0])
