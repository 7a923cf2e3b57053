"""Field-rotation determinants, sign certificates and canonical reduction."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .errors import FreeParameterError, RotationCertificateError, ShapeError, UnknownParameterError
from .polysys import (
    ParamCoefficient,
    ParamPolynomial,
    PlanarSystem,
    X,
    Y,
    is_lienard_shape,
    numeric_system,
)

PSD, NSD, INDEFINITE, UNKNOWN = "PSD", "NSD", "INDEFINITE", "UNKNOWN"

# fixed sampling grid for indefiniteness witnesses
_GRID = tuple(Fraction(v) for v in (-3, -2, -1, Fraction(-1, 2), Fraction(-1, 3), 0, Fraction(1, 3), Fraction(1, 2), 1, 2, 3))


@dataclass(frozen=True)
class SemidefiniteVerdict:
    verdict: str
    witness: tuple | None = None  # ((x+, y+), (x-, y-)) with opposite signs


def rotation_determinant(sys: PlanarSystem, param: str) -> ParamPolynomial:
    """``P * dQ/dparam - Q * dP/dparam`` as an exact polynomial."""
    if param not in sys.parameters:
        raise UnknownParameterError(f"{param!r} is not a parameter of this system")
    return sys.p * sys.q.diff_param(param) - sys.q * sys.p.diff_param(param)


def _value(poly: ParamPolynomial, x: Fraction, y: Fraction) -> Fraction:
    return sum((c.constant * x**i * y**j for (i, j), c in poly.items()), Fraction(0))


def semidefinite_verdict(poly: ParamPolynomial) -> SemidefiniteVerdict:
    """Conservative sign certificate for a parameter-free polynomial.

    PSD/NSD come only from structure: every term is an even monomial
    ``x^(2a) y^(2b)`` and all coefficients share a sign.  INDEFINITE is
    backed by two grid points of opposite sign.
    """
    if poly.parameters:
        raise FreeParameterError(f"free parameters remain: {', '.join(sorted(poly.parameters))}")
    if poly.is_zero():
        return SemidefiniteVerdict(PSD)
    coefs = [c.constant for c in (poly.coefficient(i, j) for i, j in poly)]
    if all(i % 2 == 0 and j % 2 == 0 for i, j in poly):
        if all(c > 0 for c in coefs):
            return SemidefiniteVerdict(PSD)
        if all(c < 0 for c in coefs):
            return SemidefiniteVerdict(NSD)

    # odd-symmetry shortcut: f(-x, -y) = -f, f(x, -y) = -f or f(-x, y) = -f
    for sx, sy in ((-1, -1), (1, -1), (-1, 1)):
        if all(((sx**i) * (sy**j)) == -1 for i, j in poly):
            for x, y in product(_GRID, _GRID):
                v = _value(poly, x, y)
                if v != 0:
                    a, b = (x, y), (sx * x, sy * y)
                    return SemidefiniteVerdict(INDEFINITE, (a, b) if v > 0 else (b, a))

    pos = neg = None
    for x, y in product(_GRID, _GRID):
        v = _value(poly, x, y)
        if v > 0 and pos is None:
            pos = (x, y)
        elif v < 0 and neg is None:
            neg = (x, y)
        if pos and neg:
            return SemidefiniteVerdict(INDEFINITE, (pos, neg))
    return SemidefiniteVerdict(UNKNOWN)


def reversibility_center_check(sys: PlanarSystem, a=None) -> bool:
    """Exact test of ``P(x,-y) = -P(x,y)`` and ``Q(x,-y) = Q(x,y)``."""
    p, q = numeric_system(sys, a)
    return p.reflect_y() == -p and q.reflect_y() == q


@dataclass(frozen=True)
class RotationEntry:
    parameter: str
    determinant: ParamPolynomial
    verdict: SemidefiniteVerdict


@dataclass(frozen=True)
class CanonicalizationReport:
    system: PlanarSystem
    rotation_parameters: tuple[RotationEntry, ...]
    fixed: tuple[tuple[str, str, Fraction], ...]  # (label, original coefficient, new value)


def canonicalize(sys: PlanarSystem) -> CanonicalizationReport:
    """Set every even coefficient to one and certify the odd parameters as rotation parameters."""
    if sys.family not in ("lienard_1_2", "canonical_2_1", "symmetric_2_4", "rychkov_2_10") or not is_lienard_shape(sys):
        raise ShapeError(f"canonical reduction needs a Lienard-shaped system, got family {sys.family}")
    q_terms: dict[tuple[int, int], ParamCoefficient] = {(1, 0): ParamCoefficient(-1)}
    fixed: list[tuple[str, str, Fraction]] = []
    odd_params: list[str] = []
    top = max(j for (i, j) in sys.q if i == 0)
    for j in range(1, top + 1):
        c = sys.q.coefficient(0, j)
        if j % 2 == 0:
            if c != ParamCoefficient(1):
                fixed.append((f"mu{j}", c.to_text(), Fraction(1)))
            q_terms[(0, j)] = ParamCoefficient(1)
        else:
            q_terms[(0, j)] = c
            for n in sorted(c.parameters):
                if n not in odd_params:
                    odd_params.append(n)
    q = ParamPolynomial(q_terms)
    params = tuple(n for n in sys.parameters if n in odd_params)
    shared = set(odd_params) & {n for (i, j), c in sys.q.items() if j % 2 == 0 for n in c.parameters}
    if shared:
        raise RotationCertificateError(f"parameters shared by odd and even terms: {', '.join(sorted(shared))}")
    family = "canonical_2_1" if params and all(not q.coefficient(0, j).is_constant() for j in range(1, top + 1, 2)) else "lienard_1_2"
    canon = PlanarSystem(Y, q, params, family)
    entries = []
    for n in params:
        delta = rotation_determinant(canon, n)
        verdict = semidefinite_verdict(delta) if not delta.parameters else SemidefiniteVerdict(UNKNOWN)
        if delta.is_zero() or verdict.verdict not in (PSD, NSD):
            raise RotationCertificateError(f"parameter {n}: determinant {delta} is not sign-definite ({verdict.verdict})")
        entries.append(RotationEntry(n, delta, verdict))
    return CanonicalizationReport(canon, tuple(entries), tuple(fixed))


def rotation_report(sys: PlanarSystem) -> list[RotationEntry]:
    """Determinant and verdict for every declared parameter."""
    out = []
    for n in sys.parameters:
        delta = rotation_determinant(sys, n)
        verdict = semidefinite_verdict(delta) if not delta.parameters else SemidefiniteVerdict(UNKNOWN)
        out.append(RotationEntry(n, delta, verdict))
    return out
