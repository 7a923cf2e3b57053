import math

import numpy as np
import pytest

from lienard.bifurcate import (
    StepPolicy,
    continue_cycle,
    find_fold,
    hopf_scan,
    averaging_weights,
    is_staircase,
    placement_coefficients,
    staircase_coefficients,
    staircase_construct,
    staircase_place,
    staircase_system,
)
from lienard.cycles import find_cycles
from lienard.errors import BudgetExhausted, InputError, NotBracketed, UnknownParameterError
from lienard.polysys import build_canonical, build_cubic, build_rychkov

RYCHKOV = build_rychkov()
RYCHKOV_A = {"mu1": -0.001, "mu3": 0.1, "mu5": -1.0}


def averaged_fold(mu1: float, mu5: float) -> tuple[float, float]:
    """Double root of ``mu1/2 + 3 mu3/8 u + 5 mu5/16 u^2`` in ``u = r^2``: ``(mu3, r)``."""
    b = 8 / 3 * math.sqrt(4 * (mu1 / 2) * (5 * mu5 / 16))
    u = (3 * b / 8) / (2 * -(5 * mu5 / 16))
    return b, math.sqrt(u)


# ---------------------------------------------------------------------------
# Hopf


def test_hopf_canonical_exact_zero():
    hs = hopf_scan(build_canonical(1), {"mu3": -1.0}, "mu1", (-0.5, 0.3))
    assert len(hs) == 1
    assert abs(hs[0].value) <= 1e-10
    assert hs[0].location == (0.0, 0.0)
    assert hs[0].direction == 1


@pytest.mark.parametrize("mu, alpha", [(0.2, 0.0), (-0.35, 0.1), (1.0, -0.5)])
def test_hopf_cubic_lambda(mu, alpha):
    hs = hopf_scan(build_cubic(), {"mu": mu, "alpha": alpha}, "lambda", (-3.0, 3.0), region=(-1, 3, -1, 1))
    at_origin = [h for h in hs if h.location == (0.0, 0.0)]
    at_right = [h for h in hs if h.location == (2.0, 0.0)]
    assert len(at_origin) == 1 and abs(at_origin[0].value - mu) <= 1e-10
    # trace at (2, 0) is lam + mu + 4 alpha
    assert len(at_right) == 1 and abs(at_right[0].value - (-mu - 4 * alpha)) <= 1e-10


def test_hopf_cubic_alpha():
    lam, mu = 0.3, 0.2
    hs = hopf_scan(build_cubic(), {"lambda": lam, "mu": mu}, "alpha", (-1.0, 1.0), region=(-1, 3, -1, 1))
    assert [h.location for h in hs] == [(2.0, 0.0)]
    assert abs(hs[0].value + (lam + mu) / 4) <= 1e-10


def test_hopf_scan_errors():
    with pytest.raises(UnknownParameterError):
        hopf_scan(build_canonical(1), {"mu3": -1}, "nope", (0, 1))
    with pytest.raises(InputError):
        hopf_scan(build_canonical(1), {"mu3": -1}, "mu1", (1, 0))


# ---------------------------------------------------------------------------
# continuation and folds


def test_fold_of_rychkov_pair_matches_averaging():
    seed = find_cycles(RYCHKOV, RYCHKOV_A, (0.0, 10.0)).cycles[1]
    br = continue_cycle(RYCHKOV, RYCHKOV_A, "mu3", 0.0, seed, StepPolicy(initial=0.005, max_step=0.02))
    assert br.event == "fold"
    b, r = averaged_fold(-0.001, -1.0)
    assert br.fold.value == pytest.approx(b, rel=2e-2)
    assert br.fold.s == pytest.approx(r, rel=2e-2)
    assert abs(br.fold.multiplier - 1) <= 1e-3
    assert abs(br.fold.side_counts[0] - br.fold.side_counts[1]) == 2


def test_find_fold_with_bracket():
    fold = find_fold(RYCHKOV, RYCHKOV_A, "mu3", (0.05, 0.1), (0.0, 10.0))
    assert fold.side_counts == (0, 2)
    assert abs(fold.multiplier - 1) <= 1e-3
    assert fold.value == pytest.approx(averaged_fold(-0.001, -1.0)[0], rel=2e-2)


def test_find_fold_requires_count_change():
    with pytest.raises(NotBracketed):
        find_fold(RYCHKOV, RYCHKOV_A, "mu3", (0.1, 0.2), (0.0, 10.0))
    with pytest.raises(InputError):
        find_fold(RYCHKOV, RYCHKOV_A, "mu3", None, (0.0, 10.0))


def test_monotone_branch_canonical():
    sys = build_canonical(1)
    a = {"mu1": 0.2, "mu3": -2.0}
    seed = find_cycles(sys, a, (0.0, 10.0)).cycles[0]
    br = continue_cycle(sys, a, "mu3", -0.5, seed, StepPolicy(initial=0.05, max_step=0.05))
    assert br.event == "range-end"
    assert br.is_monotone()
    assert np.all(np.diff(br.amplitudes) > 0)


def test_branch_ends_at_hopf():
    sys = build_canonical(1)
    a = {"mu1": 0.1, "mu3": -1.0}
    seed = find_cycles(sys, a, (0.0, 10.0)).cycles[0]
    br = continue_cycle(sys, a, "mu1", -0.5, seed)
    assert br.event == "amplitude-to-zero"
    assert abs(br.hopf.value) < 1e-6


def test_continuation_rejects_unknown_parameter():
    seed = find_cycles(RYCHKOV, RYCHKOV_A, (0.0, 10.0)).cycles[0]
    with pytest.raises(UnknownParameterError):
        continue_cycle(RYCHKOV, RYCHKOV_A, "mu2", 1.0, seed)


# ---------------------------------------------------------------------------
# staircase


def test_staircase_coefficients():
    assert staircase_coefficients(1, 10, 1) == [0.1, -1.0]
    assert staircase_coefficients(2, 10, 1) == [-0.001, 0.1, -1.0]
    c = staircase_coefficients(3, 10, 2, top_sign=1)
    assert [np.sign(v) for v in c] == [-1, 1, -1, 1]
    with pytest.raises(InputError):
        staircase_coefficients(2, 1.0, 1)


def test_staircase_k1_and_k2():
    r1 = staircase_construct(1)
    assert r1.success and r1.count == 1 and r1.cycles[0].stability == "stable"
    r2 = staircase_construct(2, shape="rychkov")
    assert r2.success and r2.count == 2
    assert is_staircase(r2.cycles, 2)
    assert r2.system == staircase_system(2, "rychkov")


def test_staircase_budget_exhausted_reports_best():
    with pytest.raises(BudgetExhausted) as info:
        staircase_construct(2, ratio=1.5, budget=1)
    assert info.value.best is not None
    assert info.value.best.attempts == [(1.5, 1.0, info.value.best.count)]


def test_averaging_weights_are_cosine_moments():
    th = np.linspace(0, 2 * np.pi, 4001)[:-1]
    for i, w in enumerate(averaging_weights(4)):
        assert w == pytest.approx(np.mean(np.cos(th) ** (2 * i + 2)), rel=1e-12)


def test_placement_recovers_rychkov_roots():
    # the Rychkov coefficients have averaged roots at r = 0.1236, 0.3236
    mu = placement_coefficients((0.1236, 0.3236), 1.0)
    drift = np.polynomial.polynomial.polyval(0.2**2, np.multiply(mu, averaging_weights(2)))
    assert drift == pytest.approx(-(0.04 - 0.1236**2) * (0.04 - 0.3236**2), rel=1e-12)
    with pytest.raises(InputError):
        placement_coefficients((0.2, 0.2))


@pytest.mark.parametrize("radii", [(0.2, 0.4, 0.6), (0.3, 0.6, 0.9)])
def test_placed_staircase_k3(radii):
    res = staircase_place(radii, 0.1)
    assert res.success and is_staircase(res.cycles, 3)
    assert [c.amplitude for c in res.cycles] == pytest.approx(radii, rel=2e-2)
    assert [c.stability for c in res.cycles] == ["stable", "unstable", "stable"]
