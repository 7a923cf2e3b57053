from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from lienard.errors import FreeParameterError, RotationCertificateError, ShapeError, UnknownParameterError
from lienard.polysys import X, Y, ParamPolynomial, PlanarSystem, build_canonical, build_cubic, build_lienard, build_rychkov
from lienard.rotation import (
    INDEFINITE,
    NSD,
    PSD,
    UNKNOWN,
    canonicalize,
    reversibility_center_check,
    rotation_determinant,
    rotation_report,
    semidefinite_verdict,
)


def y_power(n: int) -> ParamPolynomial:
    return ParamPolynomial.monomial(0, n)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_lienard_determinants(k):
    # p = y does not depend on any parameter, so the determinant is y * dq/dmu_j = y^(j+1)
    sys = build_lienard(k)
    for j in range(1, 2 * k + 2):
        d = rotation_determinant(sys, f"mu{j}")
        assert d == y_power(j + 1)
        v = semidefinite_verdict(d).verdict
        assert v == (PSD if j % 2 == 1 else INDEFINITE)


def test_first_odd_parameter_gives_y_squared():
    for k in range(1, 6):
        assert rotation_determinant(build_canonical(k), "mu1") == Y * Y


def test_cubic_determinants():
    sys = build_cubic()
    assert rotation_determinant(sys, "lambda") == Y * Y
    assert rotation_determinant(sys, "alpha") == X * X * Y * Y
    d_mu = rotation_determinant(sys, "mu")
    assert d_mu == X * Y * Y - Y * Y
    assert semidefinite_verdict(rotation_determinant(sys, "alpha")).verdict == PSD
    assert semidefinite_verdict(d_mu).verdict == INDEFINITE


def test_unknown_parameter():
    with pytest.raises(UnknownParameterError):
        rotation_determinant(build_canonical(1), "mu2")


def test_verdict_needs_numbers():
    with pytest.raises(FreeParameterError):
        semidefinite_verdict(build_lienard(1).q)


def test_verdict_edge_cases():
    assert semidefinite_verdict(ParamPolynomial()).verdict == PSD
    assert semidefinite_verdict(-(X**2) - Y**4).verdict == NSD
    # (x - y)^2 is nonnegative but not a sum of even monomials: the check stays conservative
    v = semidefinite_verdict((X - Y) ** 2)
    assert v.verdict == UNKNOWN


GRID = [Fraction(n, 4) for n in range(-12, 13)]

terms = st.dictionaries(
    st.tuples(st.integers(0, 4), st.integers(0, 4)),
    st.fractions(min_value=-5, max_value=5, max_denominator=6),
    max_size=5,
).map(ParamPolynomial)


@given(terms)
def test_verdict_soundness(poly):
    v = semidefinite_verdict(poly)
    if v.verdict in (PSD, NSD):
        sign = 1 if v.verdict == PSD else -1
        for x, y in product(GRID, GRID):
            assert sign * poly.exact_value(x, y) >= 0
    elif v.verdict == INDEFINITE:
        (xp, yp), (xn, yn) = v.witness
        assert poly.exact_value(xp, yp) > 0
        assert poly.exact_value(xn, yn) < 0


def test_reversibility():
    assert reversibility_center_check(build_lienard(2, [0, 0, 0], None), {"mu2": 1, "mu4": -1})
    assert not reversibility_center_check(build_canonical(1), {"mu1": 0.1, "mu3": -1})
    cubic0 = {"lambda": 0, "mu": 0, "alpha": 0}
    assert reversibility_center_check(build_cubic(), cubic0)


def test_canonicalize_fixes_even_coefficients():
    sys = build_lienard(2, None, ["3/2", 7])
    rep = canonicalize(sys)
    assert rep.system == build_canonical(2)
    assert [e.parameter for e in rep.rotation_parameters] == ["mu1", "mu3", "mu5"]
    assert [e.determinant for e in rep.rotation_parameters] == [Y**2, Y**4, Y**6]
    assert all(e.verdict.verdict == PSD for e in rep.rotation_parameters)
    assert [label for label, _, _ in rep.fixed] == ["mu2", "mu4"]


def test_canonicalize_rejects_non_lienard():
    with pytest.raises(ShapeError):
        canonicalize(build_cubic())
    with pytest.raises(ShapeError):
        canonicalize(PlanarSystem(X, Y, (), "general_3_1"))


def test_canonicalize_rejects_shared_parameter():
    sys = build_lienard(1, ["a", "b"], ["a"])
    with pytest.raises(RotationCertificateError):
        canonicalize(sys)


def test_rotation_report_rychkov():
    rep = rotation_report(build_rychkov())
    assert [(e.parameter, e.determinant, e.verdict.verdict) for e in rep] == [
        ("mu1", Y**2, PSD),
        ("mu3", Y**4, PSD),
        ("mu5", Y**6, PSD),
    ]
