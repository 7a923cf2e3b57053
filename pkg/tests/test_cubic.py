import pytest

from lienard.cubic import (
    ORIGIN,
    RIGHT,
    SIG_BIG,
    SIG_N0,
    SIG_N2,
    SYSTEM,
    Distribution,
    analyze_distribution,
    assignment,
    double_hopf_locus,
    double_hopf_point,
    focus_signs,
    perturbed_double_hopf,
    sweep_distributions,
)
from lienard.cycles import fine_focus_order
from lienard.polysys import find_equilibria


def test_distribution_helpers():
    d = Distribution(1, 1, 1)
    assert str(d) == "((1,1),1)" and d.total == 3 and d.in_listed
    assert not Distribution(0, 0, 0).in_listed
    assert Distribution(0, 0, 0).below_listed
    assert not Distribution(3, 0, 0).below_listed


def test_double_hopf_locus_zeroes_both_traces():
    for mu in (-1.0, 0.5, 2.0):
        lam, alpha = double_hopf_locus(mu)
        eqs = find_equilibria(SYSTEM, assignment(lam, mu, alpha), (-1, 3, -1, 1))
        anti = [e for e in eqs if e.is_antisaddle]
        assert [e.location for e in anti] == [ORIGIN, RIGHT]
        assert all(e.trace == 0.0 for e in anti)


@pytest.mark.parametrize("mu", [1.0, -1.0])
def test_weak_foci_are_first_order(mu):
    lam, alpha = double_hopf_locus(mu)
    a = assignment(lam, mu, alpha)
    for e in find_equilibria(SYSTEM, a, (-1, 3, -1, 1)):
        if e.is_antisaddle:
            est = fine_focus_order(SYSTEM, a, e)
            assert est.order == 1
            assert est.leading_sign == (1 if mu > 0 else -1)


def test_perturbation_reverses_focus_stability():
    signs = focus_signs(-1.0)
    lam, mu, alpha = double_hopf_point(-1.0, 0.01, signs)
    eqs = {e.location: e for e in find_equilibria(SYSTEM, assignment(lam, mu, alpha), (-1, 3, -1, 1))}
    for loc in (ORIGIN, RIGHT):
        assert eqs[loc].trace == pytest.approx(-signs[loc] * 0.01, abs=1e-12)


def test_conservative_point():
    r = analyze_distribution(0.0, 0.0, 0.0)
    assert r.distribution.as_tuple() == ((0, 0), 0)
    assert r.center_candidates == [ORIGIN, RIGHT]
    assert "outside distribution list" in r.flags


def test_double_hopf_search():
    out = perturbed_double_hopf()
    assert out.found
    assert out.result.distribution.as_tuple() == ((1, 1), 0)
    sigs = sorted(c.signature for c in out.result.cycles)
    assert sigs == sorted([SIG_N0, SIG_N2])


def test_three_cycle_configuration():
    r = analyze_distribution(0.99, 1.0, -0.5)
    assert r.distribution.as_tuple() == ((1, 1), 1)
    assert [c.signature for c in r.cycles if c.signature == SIG_BIG] == [SIG_BIG]
    assert r.flags == []
    assert all(abs(c.multiplier - c.multiplier_fd) < 1e-3 * c.multiplier for c in r.cycles)


def test_sweep_small_grid():
    res = sweep_distributions([-0.2, 0.2], [0.0], [0.0])
    assert len(res.cells) == 2
    assert res.silent_anomalies() == []
    assert list(res.summary()) == ["((0,0),0)"]
