"""Parameter-affine planar polynomial systems with exact rational coefficients.

A system is a pair ``(P, Q)`` of bivariate polynomials whose coefficients are
affine forms in named parameters.  Everything symbolic is kept in
:class:`fractions.Fraction`; floats only appear once a numeric
:class:`ParameterAssignment` is substituted.
"""

from __future__ import annotations

import math
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational, Real
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    InputError,
    MissingParameterError,
    RegionTooCoarseError,
    ShapeError,
)

FAMILIES = (
    "lienard_1_2",
    "canonical_2_1",
    "symmetric_2_4",
    "rychkov_2_10",
    "cubic_4_1",
    "general_3_1",
)
LIENARD_FAMILIES = ("lienard_1_2", "canonical_2_1", "symmetric_2_4", "rychkov_2_10")

TRACE_TOL = 1e-12
DET_TOL = 1e-12

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*$")
_NUMBER_RE = re.compile(r"(\d+(?:/\d+)?|\d*\.\d+(?:[eE][+-]?\d+)?|\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)$")


def to_fraction(value) -> Fraction:
    """Exact rational for ints, Fractions, and strings; floats go through repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, Real):
        if not math.isfinite(value):
            raise InputError(f"non-finite coefficient {value!r}")
        return Fraction(repr(float(value)))
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def _exact(value) -> Fraction:
    # assignment values: floats convert bit-exactly
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    value = float(value)
    if not math.isfinite(value):
        raise InputError(f"non-finite parameter value {value!r}")
    return Fraction(value)


def format_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


# ---------------------------------------------------------------------------
# coefficients


@dataclass(frozen=True)
class ParamCoefficient:
    """``constant + sum(linear[name] * name)`` with exact rationals."""

    constant: Fraction = Fraction(0)
    linear: tuple[tuple[str, Fraction], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "constant", to_fraction(self.constant))
        merged: dict[str, Fraction] = {}
        items = self.linear.items() if isinstance(self.linear, Mapping) else self.linear
        for name, c in items:
            if not _NAME_RE.match(name):
                raise InputError(f"invalid parameter name {name!r}")
            merged[name] = merged.get(name, Fraction(0)) + to_fraction(c)
        object.__setattr__(
            self, "linear", tuple(sorted((n, c) for n, c in merged.items() if c != 0))
        )

    @classmethod
    def of(cls, value) -> "ParamCoefficient":
        if isinstance(value, ParamCoefficient):
            return value
        if isinstance(value, str) and _NAME_RE.match(value.strip()):
            return cls(Fraction(0), ((value.strip(), Fraction(1)),))
        if isinstance(value, str):
            return cls.parse(value)
        return cls(to_fraction(value))

    @property
    def parameters(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.linear)

    def is_zero(self) -> bool:
        return self.constant == 0 and not self.linear

    def is_constant(self) -> bool:
        return not self.linear

    def coefficient_of(self, name: str) -> Fraction:
        for n, c in self.linear:
            if n == name:
                return c
        return Fraction(0)

    def __add__(self, other):
        other = ParamCoefficient.of(other)
        return ParamCoefficient(self.constant + other.constant, self.linear + other.linear)

    __radd__ = __add__

    def __neg__(self):
        return ParamCoefficient(-self.constant, tuple((n, -c) for n, c in self.linear))

    def __sub__(self, other):
        return self + (-ParamCoefficient.of(other))

    def __rsub__(self, other):
        return ParamCoefficient.of(other) - self

    def __mul__(self, other):
        other = ParamCoefficient.of(other)
        if self.is_constant():
            k = self.constant
            return ParamCoefficient(k * other.constant, tuple((n, k * c) for n, c in other.linear))
        if other.is_constant():
            return other * self
        raise ShapeError("product of two parameter-dependent coefficients is not affine")

    __rmul__ = __mul__

    def substitute(self, values: Mapping[str, object]) -> "ParamCoefficient":
        """Replace the named parameters that appear in ``values``."""
        const = self.constant
        rest = []
        for n, c in self.linear:
            if n in values:
                const += c * _exact(values[n])
            else:
                rest.append((n, c))
        return ParamCoefficient(const, tuple(rest))

    def value(self, values: Mapping[str, object] | None = None) -> Fraction:
        sub = self.substitute(values or {})
        if sub.linear:
            raise MissingParameterError(f"no value for {', '.join(sorted(sub.parameters))}")
        return sub.constant

    def to_text(self) -> str:
        parts = []
        if self.constant != 0 or not self.linear:
            parts.append(format_fraction(self.constant))
        for n, c in self.linear:
            if c == 1:
                parts.append(n)
            elif c == -1:
                parts.append(f"-{n}")
            else:
                parts.append(f"{format_fraction(c)}*{n}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __str__(self):
        return self.to_text()

    @classmethod
    def parse(cls, text: str, allow_decimal: bool = True) -> "ParamCoefficient":
        """Parse ``"3/2"``, ``"lambda - mu"``, ``"-1/2*alpha + 1"`` and similar."""
        s = text.replace(" ", "")
        if not s:
            raise InputError("empty coefficient")
        if s[0] not in "+-":
            s = "+" + s
        pieces = re.findall(r"[+-][^+-]*", s)
        # re-join exponents such as 1e-5 split by the findall above
        joined: list[str] = []
        for p in pieces:
            if joined and re.search(r"\d[eE]$", joined[-1]):
                joined[-1] += p
            else:
                joined.append(p)
        if "".join(joined) != s:
            raise InputError(f"cannot parse coefficient {text!r}")
        const = Fraction(0)
        linear: list[tuple[str, Fraction]] = []
        for p in joined:
            sign = -1 if p[0] == "-" else 1
            body = p[1:]
            if not body:
                raise InputError(f"dangling sign in {text!r}")
            if "*" in body:
                num, _, name = body.partition("*")
                if not _NAME_RE.match(name) or not _NUMBER_RE.match(num):
                    raise InputError(f"bad term {p!r} in {text!r}")
                linear.append((name, sign * _parse_number(num, allow_decimal, text)))
            elif _NAME_RE.match(body):
                linear.append((body, Fraction(sign)))
            elif _NUMBER_RE.match(body):
                const += sign * _parse_number(body, allow_decimal, text)
            else:
                raise InputError(f"bad term {p!r} in {text!r}")
        return cls(const, tuple(linear))


def _parse_number(text: str, allow_decimal: bool, context: str) -> Fraction:
    if not allow_decimal and not re.fullmatch(r"\d+(/\d+)?", text):
        raise InputError(f"coefficient {context!r} must be an exact rational p/q")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad number {text!r} in {context!r}") from exc


_ZERO = ParamCoefficient()
_ONE = ParamCoefficient(Fraction(1))


# ---------------------------------------------------------------------------
# polynomials


class ParamPolynomial:
    """Bivariate polynomial in ``x, y`` with :class:`ParamCoefficient` entries.

    Instances are immutable and hashable.  Keys of :attr:`terms` are
    ``(x_degree, y_degree)``.
    """

    __slots__ = ("_terms", "_key")

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None):
        clean: dict[tuple[int, int], ParamCoefficient] = {}
        for (i, j), c in (terms or {}).items():
            i, j = int(i), int(j)
            if i < 0 or j < 0:
                raise InputError(f"negative exponent in monomial ({i}, {j})")
            c = ParamCoefficient.of(c)
            if (i, j) in clean:
                c = clean[(i, j)] + c
            clean[(i, j)] = c
        self._terms = {k: v for k, v in sorted(clean.items()) if not v.is_zero()}
        self._key = tuple(self._terms.items())

    # construction helpers
    @classmethod
    def constant(cls, c) -> "ParamPolynomial":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, i: int, j: int, c=1) -> "ParamPolynomial":
        return cls({(i, j): c})

    @classmethod
    def x(cls) -> "ParamPolynomial":
        return cls.monomial(1, 0)

    @classmethod
    def y(cls) -> "ParamPolynomial":
        return cls.monomial(0, 1)

    @property
    def terms(self) -> Mapping[tuple[int, int], ParamCoefficient]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, i: int, j: int) -> ParamCoefficient:
        return self._terms.get((i, j), _ZERO)

    def __len__(self):
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self._terms)

    def __eq__(self, other):
        if isinstance(other, ParamPolynomial):
            return self._key == other._key
        return NotImplemented

    def __hash__(self):
        return hash(self._key)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self._terms), default=-1)

    @property
    def parameters(self) -> frozenset[str]:
        out: set[str] = set()
        for c in self._terms.values():
            out |= c.parameters
        return frozenset(out)

    def has_constant_coefficients(self) -> bool:
        return all(c.is_constant() for c in self._terms.values())

    # arithmetic
    @staticmethod
    def _lift(other) -> "ParamPolynomial":
        if isinstance(other, ParamPolynomial):
            return other
        return ParamPolynomial.constant(other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, _ZERO) + c
        return ParamPolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return ParamPolynomial({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        out: dict[tuple[int, int], ParamCoefficient] = {}
        for (i1, j1), c1 in self._terms.items():
            for (i2, j2), c2 in other._terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, _ZERO) + c1 * c2
        return ParamPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = ParamPolynomial.constant(1)
        for _ in range(n):
            out = out * self
        return out

    # calculus
    def diff_x(self) -> "ParamPolynomial":
        return ParamPolynomial({(i - 1, j): c * i for (i, j), c in self._terms.items() if i})

    def diff_y(self) -> "ParamPolynomial":
        return ParamPolynomial({(i, j - 1): c * j for (i, j), c in self._terms.items() if j})

    def diff_param(self, name: str) -> "ParamPolynomial":
        """Exact derivative with respect to a parameter (coefficients are affine)."""
        return ParamPolynomial({k: c.coefficient_of(name) for k, c in self._terms.items()})

    # substitution / evaluation
    def substitute(self, values: Mapping[str, object], complete: bool = True) -> "ParamPolynomial":
        out = ParamPolynomial({k: c.substitute(values) for k, c in self._terms.items()})
        if complete:
            missing = out.parameters
            if missing:
                raise MissingParameterError(f"no value for {', '.join(sorted(missing))}")
        return out

    def reflect_y(self) -> "ParamPolynomial":
        """The polynomial ``(x, y) -> f(x, -y)``."""
        return ParamPolynomial({(i, j): (c if j % 2 == 0 else -c) for (i, j), c in self._terms.items()})

    def homogeneous_part(self, d: int) -> "ParamPolynomial":
        return ParamPolynomial({(i, j): c for (i, j), c in self._terms.items() if i + j == d})

    def exact_value(self, x, y, values: Mapping[str, object] | None = None) -> Fraction:
        x, y = _exact(x), _exact(y)
        total = Fraction(0)
        for (i, j), c in self._terms.items():
            total += c.value(values) * x**i * y**j
        return total

    def numeric_terms(self, values: Mapping[str, object] | None = None) -> list[tuple[int, int, float]]:
        return [(i, j, float(c.value(values))) for (i, j), c in self._terms.items()]

    def evaluate(self, x: float, y: float, values: Mapping[str, object] | None = None) -> float:
        return float(sum(c * x**i * y**j for i, j, c in self.numeric_terms(values)))

    def univariate_x(self, values: Mapping[str, object] | None = None) -> list[Fraction]:
        """Coefficients (ascending) of ``f(x, 0)``."""
        deg = max((i for (i, j) in self._terms if j == 0), default=0)
        out = [Fraction(0)] * (deg + 1)
        for (i, j), c in self._terms.items():
            if j == 0:
                out[i] = c.value(values)
        return out

    # text
    def to_text(self) -> str:
        if not self._terms:
            return "0"
        order = sorted(self._terms, key=lambda k: (k[0] + k[1], -k[0]))
        parts = []
        for i, j in order:
            c = self._terms[(i, j)]
            mono = _monomial_text(i, j)
            if not mono:
                parts.append(c.to_text())
            elif c.is_constant():
                k = c.constant
                if k == 1:
                    parts.append(mono)
                elif k == -1:
                    parts.append(f"-{mono}")
                else:
                    parts.append(f"{format_fraction(k)}*{mono}")
            elif c.constant == 0 and len(c.linear) == 1 and abs(c.linear[0][1]) == 1:
                n, k = c.linear[0]
                parts.append(f"{'-' if k < 0 else ''}{n}*{mono}")
            else:
                parts.append(f"({c.to_text()})*{mono}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"ParamPolynomial({self.to_text()!r})"


def _monomial_text(i: int, j: int) -> str:
    parts = []
    if i:
        parts.append("x" if i == 1 else f"x^{i}")
    if j:
        parts.append("y" if j == 1 else f"y^{j}")
    return "*".join(parts)


X = ParamPolynomial.x()
Y = ParamPolynomial.y()


# ---------------------------------------------------------------------------
# systems and assignments


@dataclass(frozen=True)
class PlanarSystem:
    """``x' = p(x, y)``, ``y' = q(x, y)`` with declared parameters and a family tag."""

    p: ParamPolynomial
    q: ParamPolynomial
    parameters: tuple[str, ...] = ()
    family: str = "general_3_1"

    def __post_init__(self):
        object.__setattr__(self, "parameters", tuple(self.parameters))
        if self.family not in FAMILIES:
            raise InputError(f"unknown family tag {self.family!r}")
        if len(set(self.parameters)) != len(self.parameters):
            raise InputError("duplicate parameter names")
        used = self.p.parameters | self.q.parameters
        missing = used - set(self.parameters)
        if missing:
            raise InputError(f"undeclared parameters: {', '.join(sorted(missing))}")
        if self.family in LIENARD_FAMILIES:
            if not is_lienard_shape(self):
                raise ShapeError(f"family {self.family} requires p = y and q = -x + sum(c_i y^i)")
            top = max((j for (i, j) in self.q if i == 0), default=0)
            even = [self.q.coefficient(0, j) for j in range(2, top + 1, 2)]
            odd = [self.q.coefficient(0, j) for j in range(1, top + 1, 2)]
            if self.family == "canonical_2_1" and any(c != _ONE for c in even):
                raise ShapeError("family canonical_2_1 requires every even coefficient to equal 1")
            if self.family == "rychkov_2_10" and (top != 5 or any(not c.is_zero() for c in even)):
                raise ShapeError("family rychkov_2_10 requires odd terms y, y^3, y^5 only")
            if self.family == "symmetric_2_4" and any(not c.is_zero() for c in odd):
                raise ShapeError("family symmetric_2_4 requires every odd coefficient to vanish")
        elif self.family == "cubic_4_1" and self.p != Y:
            raise ShapeError("family cubic_4_1 requires p = y")

    @property
    def degree(self) -> int:
        return max(self.p.degree, self.q.degree)

    def substitute(self, values: Mapping[str, object]) -> "PlanarSystem":
        """Fix some parameters, keeping the rest symbolic."""
        p = self.p.substitute(values, complete=False)
        q = self.q.substitute(values, complete=False)
        params = tuple(n for n in self.parameters if n not in values)
        fam = self.family if self.family in ("general_3_1",) else _retag(self, p, q)
        return PlanarSystem(p, q, params, fam)

    def __str__(self):
        return f"x' = {self.p}\ny' = {self.q}"


def _retag(sys: PlanarSystem, p, q) -> str:
    if sys.family == "cubic_4_1":
        return "cubic_4_1"
    probe = PlanarSystem(p, q, tuple(sorted(p.parameters | q.parameters)), "general_3_1")
    return "lienard_1_2" if is_lienard_shape(probe) else "general_3_1"


def is_lienard_shape(sys: PlanarSystem) -> bool:
    if sys.p != Y:
        return False
    for (i, j), c in sys.q.items():
        if i == 0 and j >= 1:
            continue
        if (i, j) == (1, 0) and c == ParamCoefficient(-1):
            continue
        return False
    return sys.q.coefficient(1, 0) == ParamCoefficient(-1)


class ParameterAssignment(Mapping):
    """Numeric values for named parameters (read-only mapping)."""

    __slots__ = ("_values",)

    def __init__(self, values: Mapping[str, float] | Iterable[tuple[str, float]] = (), **kw):
        vals = dict(values)
        vals.update(kw)
        for k, v in vals.items():
            if not isinstance(v, (Real, Fraction)) or isinstance(v, bool):
                raise InputError(f"parameter {k!r} has non-numeric value {v!r}")
        self._values = dict(sorted(vals.items()))

    def __getitem__(self, key):
        return self._values[key]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def __hash__(self):
        return hash(tuple((k, float(v)) for k, v in self._values.items()))

    def __eq__(self, other):
        if isinstance(other, Mapping):
            return dict(self.items()) == dict(other.items())
        return NotImplemented

    def __repr__(self):
        return f"ParameterAssignment({self._values!r})"

    def updated(self, **changes) -> "ParameterAssignment":
        vals = dict(self._values)
        vals.update(changes)
        return ParameterAssignment(vals)

    def covering(self, sys: PlanarSystem) -> "ParameterAssignment":
        missing = [n for n in sys.parameters if n not in self._values]
        if missing:
            raise MissingParameterError(f"no value for {', '.join(missing)}")
        return self


def as_assignment(sys: PlanarSystem, a: Mapping[str, object] | None) -> ParameterAssignment:
    if a is None:
        a = {}
    if not isinstance(a, ParameterAssignment):
        a = ParameterAssignment(a)
    return a.covering(sys)


def numeric_system(sys: PlanarSystem, a: Mapping[str, object] | None) -> tuple[ParamPolynomial, ParamPolynomial]:
    """``(P, Q)`` with every parameter substituted, coefficients exact."""
    a = as_assignment(sys, a)
    return sys.p.substitute(a), sys.q.substitute(a)


# ---------------------------------------------------------------------------
# constructors


def _entry(value, default_name: str) -> ParamCoefficient:
    if value is None:
        return ParamCoefficient.of(default_name)
    if isinstance(value, str) and not _NAME_RE.match(value.strip()):
        return ParamCoefficient.parse(value)
    return ParamCoefficient.of(value)


def build_lienard(k: int, odd: Sequence | None = None, even: Sequence | None = None) -> PlanarSystem:
    """``x' = y, y' = -x + mu_1 y + ... + mu_{2k+1} y^{2k+1}``.

    ``odd`` holds ``mu_1, mu_3, ..., mu_{2k+1}`` and ``even`` holds
    ``mu_2, ..., mu_{2k}``.  Entries are numbers or parameter names; ``None``
    (for a list or an entry) means the default symbol ``mu<index>``.
    """
    if not isinstance(k, int) or k < 1:
        raise InputError("k must be a positive integer")
    odd = [None] * (k + 1) if odd is None else list(odd)
    even = [None] * k if even is None else list(even)
    if len(odd) != k + 1:
        raise InputError(f"expected {k + 1} odd coefficients, got {len(odd)}")
    if len(even) != k:
        raise InputError(f"expected {k} even coefficients, got {len(even)}")

    coeffs: dict[int, ParamCoefficient] = {}
    for idx, v in enumerate(odd):
        coeffs[2 * idx + 1] = _entry(v, f"mu{2 * idx + 1}")
    for idx, v in enumerate(even):
        coeffs[2 * idx + 2] = _entry(v, f"mu{2 * idx + 2}")

    q_terms: dict[tuple[int, int], ParamCoefficient] = {(1, 0): ParamCoefficient(-1)}
    for power, c in coeffs.items():
        q_terms[(0, power)] = c
    q = ParamPolynomial(q_terms)

    params: list[str] = []
    for power in sorted(coeffs):
        for n in sorted(coeffs[power].parameters):
            if n not in params:
                params.append(n)

    odd_c = [coeffs[2 * i + 1] for i in range(k + 1)]
    even_c = [coeffs[2 * i + 2] for i in range(k)]
    if all(c.is_zero() for c in odd_c):
        family = "symmetric_2_4"
    elif all(c == _ONE for c in even_c) and all(not c.is_constant() for c in odd_c):
        family = "canonical_2_1"
    elif k == 2 and all(c.is_zero() for c in even_c) and all(not c.is_constant() for c in odd_c):
        family = "rychkov_2_10"
    else:
        family = "lienard_1_2"
    return PlanarSystem(Y, q, tuple(params), family)


def build_canonical(k: int) -> PlanarSystem:
    """Canonical form with every even coefficient equal to one."""
    return build_lienard(k, None, [1] * k)


def build_rychkov() -> PlanarSystem:
    """``y' = -x + mu1 y + mu3 y^3 + mu5 y^5``."""
    return build_lienard(2, None, [0, 0])


def build_cubic(lam="lambda", mu="mu", alpha="alpha") -> PlanarSystem:
    """``x' = y, y' = -x + (lam - mu) y + 3/2 x^2 + mu x y - 1/2 x^3 + alpha x^2 y``."""
    lam_c, mu_c, al_c = (ParamCoefficient.of(v) for v in (lam, mu, alpha))
    q = ParamPolynomial(
        {
            (1, 0): -1,
            (0, 1): lam_c - mu_c,
            (2, 0): Fraction(3, 2),
            (1, 1): mu_c,
            (3, 0): Fraction(-1, 2),
            (2, 1): al_c,
        }
    )
    params: list[str] = []
    for c in (lam_c, mu_c, al_c):
        for n in sorted(c.parameters):
            if n not in params:
                params.append(n)
    return PlanarSystem(Y, q, tuple(params), "cubic_4_1")


# ---------------------------------------------------------------------------
# evaluation


def eval_field(sys: PlanarSystem, a: Mapping[str, object] | None, point) -> tuple[float, float]:
    p, q = numeric_system(sys, a)
    x, y = point
    return float(p.exact_value(x, y)), float(q.exact_value(x, y))


def jacobian(sys: PlanarSystem, a: Mapping[str, object] | None, point) -> np.ndarray:
    """Exact partial derivatives at ``point``, rounded once to float."""
    p, q = numeric_system(sys, a)
    x, y = point
    rows = [
        [p.diff_x().exact_value(x, y), p.diff_y().exact_value(x, y)],
        [q.diff_x().exact_value(x, y), q.diff_y().exact_value(x, y)],
    ]
    return np.array([[float(v) for v in r] for r in rows])


# ---------------------------------------------------------------------------
# equilibria


@dataclass(frozen=True)
class Equilibrium:
    location: tuple[float, float]
    jacobian: tuple[tuple[float, float], tuple[float, float]]
    trace: float
    determinant: float
    classification: str

    @property
    def is_antisaddle(self) -> bool:
        return self.determinant > DET_TOL

    @property
    def x(self) -> float:
        return self.location[0]


def classify_linear(trace: float, det: float) -> str:
    if abs(det) <= DET_TOL:
        return "degenerate"
    if det < 0:
        return "saddle"
    if abs(trace) <= TRACE_TOL:
        return "center-candidate"
    kind = "focus" if trace * trace - 4 * det < 0 else "node"
    return f"{'stable' if trace < 0 else 'unstable'} {kind}"


def make_equilibrium(sys: PlanarSystem, a, point) -> Equilibrium:
    J = jacobian(sys, a, point)
    trace = J[0, 0] + J[1, 1]
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    return Equilibrium(
        (float(point[0]), float(point[1])),
        ((float(J[0, 0]), float(J[0, 1])), (float(J[1, 0]), float(J[1, 1]))),
        float(trace),
        float(det),
        classify_linear(float(trace), float(det)),
    )


def _real_roots(coeffs: Sequence[Fraction], tol: float = 1e-9) -> list:
    """Real roots of an exact univariate polynomial (ascending coefficients).

    Roots are polished by Newton in float and snapped to a nearby rational
    when that rational is an exact root.
    """
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if not coeffs:
        raise ShapeError("polynomial vanishes identically")
    roots: list = []
    m = 0
    while m < len(coeffs) and coeffs[m] == 0:
        m += 1
    if m:
        roots.append(Fraction(0))
        coeffs = coeffs[m:]
    if len(coeffs) <= 1:
        return roots

    def f(xv, cs=coeffs):
        return sum(c * xv**i for i, c in enumerate(cs))

    fc = [float(c) for c in coeffs]
    dfc = [i * c for i, c in enumerate(fc)][1:]
    raw = np.roots(fc[::-1])
    scale = max(1.0, max(abs(r) for r in raw))
    found: list[float] = []
    for r in raw:
        if abs(r.imag) > 1e-7 * scale:
            continue
        xv = float(r.real)
        for _ in range(50):
            fv = sum(c * xv**i for i, c in enumerate(fc))
            dv = sum(c * xv**i for i, c in enumerate(dfc))
            if dv == 0:
                break
            step = fv / dv
            xv -= step
            if abs(step) <= 1e-16 * max(1.0, abs(xv)):
                break
        if all(abs(xv - g) > tol * max(1.0, abs(g)) for g in found):
            found.append(xv)
    for xv in found:
        snapped = None
        for den in (1, 2, 3, 4, 5, 6, 8, 10, 12, 16, 100, 1000):
            cand = Fraction(round(xv * den), den)
            if abs(float(cand) - xv) < 1e-7 * max(1.0, abs(xv)) and f(cand) == 0:
                snapped = cand
                break
        roots.append(snapped if snapped is not None else xv)
    uniq: list = []
    for r in sorted(roots, key=float):
        if not uniq or abs(float(r) - float(uniq[-1])) > tol * max(1.0, abs(float(r))):
            uniq.append(r)
    return uniq


def _interval_pow(lo: float, hi: float, n: int) -> tuple[float, float]:
    if n == 0:
        return 1.0, 1.0
    a, b = lo**n, hi**n
    if n % 2 == 0 and lo < 0 < hi:
        return 0.0, max(a, b)
    return min(a, b), max(a, b)


def _interval_eval(terms, box) -> tuple[float, float]:
    x0, x1, y0, y1 = box
    lo = hi = 0.0
    for i, j, c in terms:
        a0, a1 = _interval_pow(x0, x1, i)
        b0, b1 = _interval_pow(y0, y1, j)
        prods = (a0 * b0, a0 * b1, a1 * b0, a1 * b1)
        m0, m1 = min(prods), max(prods)
        if c >= 0:
            lo += c * m0
            hi += c * m1
        else:
            lo += c * m1
            hi += c * m0
    return lo, hi


def find_equilibria(
    sys: PlanarSystem,
    a: Mapping[str, object] | None = None,
    region: tuple[float, float, float, float] = (-10.0, 10.0, -10.0, 10.0),
    resolution: float = 1e-3,
    max_boxes: int = 200_000,
) -> list[Equilibrium]:
    """All equilibria inside ``region = (xmin, xmax, ymin, ymax)``, sorted by x."""
    xmin, xmax, ymin, ymax = region
    if not (xmin < xmax and ymin < ymax):
        raise InputError("empty region")
    p, q = numeric_system(sys, a)
    points: list[tuple] = []
    if p == Y:
        if not (ymin <= 0 <= ymax):
            return []
        for r in _real_roots(q.univariate_x()):
            if xmin <= float(r) <= xmax:
                points.append((r, Fraction(0)))
    else:
        points = _subdivision_roots(p, q, region, resolution, max_boxes)
    eqs = [make_equilibrium(sys, a, pt) for pt in points]
    return sorted(eqs, key=lambda e: (e.location[0], e.location[1]))


def _subdivision_roots(p, q, region, resolution, max_boxes):
    pt, qt = p.numeric_terms(), q.numeric_terms()
    px, py = p.diff_x().numeric_terms(), p.diff_y().numeric_terms()
    qx, qy = q.diff_x().numeric_terms(), q.diff_y().numeric_terms()

    def ev(terms, x, y):
        return sum(c * x**i * y**j for i, j, c in terms)

    stack = [tuple(region)]
    leaves = []
    visited = 0
    while stack:
        box = stack.pop()
        visited += 1
        if visited > max_boxes:
            raise RegionTooCoarseError(
                f"equilibrium isolation exceeded {max_boxes} boxes; shrink the region or coarsen resolution"
            )
        plo, phi = _interval_eval(pt, box)
        qlo, qhi = _interval_eval(qt, box)
        if plo > 0 or phi < 0 or qlo > 0 or qhi < 0:
            continue
        x0, x1, y0, y1 = box
        if max(x1 - x0, y1 - y0) <= resolution:
            leaves.append(box)
            continue
        xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        stack.extend([(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)])

    roots: list[tuple[float, float]] = []
    xmin, xmax, ymin, ymax = region
    for box in leaves:
        x, y = 0.5 * (box[0] + box[1]), 0.5 * (box[2] + box[3])
        ok = False
        for _ in range(60):
            f = np.array([ev(pt, x, y), ev(qt, x, y)])
            J = np.array([[ev(px, x, y), ev(py, x, y)], [ev(qx, x, y), ev(qy, x, y)]])
            try:
                step = np.linalg.solve(J, f)
            except np.linalg.LinAlgError:
                break
            damp = 1.0
            base = np.hypot(*f)
            while damp > 1e-4:
                xn, yn = x - damp * step[0], y - damp * step[1]
                if np.hypot(ev(pt, xn, yn), ev(qt, xn, yn)) <= base or base == 0:
                    break
                damp *= 0.5
            x, y = x - damp * step[0], y - damp * step[1]
            if np.hypot(*step) * damp < 1e-15 * (1 + abs(x) + abs(y)):
                ok = True
                break
        if not ok and np.hypot(ev(pt, x, y), ev(qt, x, y)) > 1e-12:
            continue
        if not (xmin <= x <= xmax and ymin <= y <= ymax):
            continue
        if all(np.hypot(x - u, y - v) > 10 * resolution * 1e-3 + 1e-9 for u, v in roots):
            roots.append((x, y))
    return roots


# ---------------------------------------------------------------------------
# infinity


@dataclass(frozen=True)
class InfinitySingularity:
    direction: tuple[float, float]
    type: str
    hyperbolic: bool
    chart: str = ""
    eigenvalues: tuple[float, float] = (math.nan, math.nan)


def _series_shift(field_terms: dict, u0: float) -> dict:
    """Re-expand ``sum c u^a v^b`` about ``u = u0``."""
    out: dict = {}
    for (pa, pb), c in field_terms.items():
        for r in range(pa + 1):
            k = (r, pb)
            out[k] = out.get(k, 0.0) + float(c) * math.comb(pa, r) * u0 ** (pa - r)
    return out


def _chart_field(p: ParamPolynomial, q: ParamPolynomial, wa: int, wb: int) -> tuple[dict, dict]:
    """Weighted x-chart ``x = 1/v^wa, y = u/v^wb`` with the time rescaled to a polynomial field.

    Returns ``(u', v')`` as dicts ``{(u_power, v_power): Fraction}``.
    """
    du: dict = {}
    dv: dict = {}
    ratio = Fraction(wb, wa)

    def add(d, key, c):
        d[key] = d.get(key, Fraction(0)) + c

    for (i, j), c in q.items():
        add(du, (j, wb - wa * i - wb * j), c.constant)
    for (i, j), c in p.items():
        e = wa - wa * i - wb * j
        add(du, (j + 1, e), -ratio * c.constant)
        add(dv, (j, 1 + e), -Fraction(1, wa) * c.constant)
    du = {k: v for k, v in du.items() if v != 0}
    dv = {k: v for k, v in dv.items() if v != 0}
    m = min(e for (_, e) in list(du) + list(dv))
    du = {(a, e - m): c for (a, e), c in du.items()}
    dv = {(a, e - m): c for (a, e), c in dv.items()}
    return du, dv


def _linear_part(du: dict, dv: dict, u0: float) -> np.ndarray:
    su, sv = _series_shift(du, u0), _series_shift(dv, u0)
    return np.array(
        [[su.get((1, 0), 0.0), su.get((0, 1), 0.0)], [sv.get((1, 0), 0.0), sv.get((0, 1), 0.0)]]
    )


def _poly2_mul(A: np.ndarray, B: np.ndarray, N: int) -> np.ndarray:
    out = np.zeros((N + 1, N + 1))
    ia, ja = np.nonzero(A)
    for i, j in zip(ia, ja):
        lim_i, lim_j = N + 1 - i, N + 1 - j
        if lim_i <= 0 or lim_j <= 0:
            continue
        out[i:, j:] += A[i, j] * B[:lim_i, :lim_j]
    return out


def _semi_hyperbolic_type(du: dict, dv: dict, u0: float, N: int = 40) -> str:
    """Topological type of a singular point with exactly one zero eigenvalue.

    Center-manifold reduction on truncated power series; the reduced
    equation ``c' = a c^m + ...`` decides: odd ``m`` with ``a`` of the same
    sign as the nonzero eigenvalue is a node, opposite sign a saddle; even
    ``m`` (saddle-node) or no nonzero term is reported as degenerate.
    """
    su, sv = _series_shift(du, u0), _series_shift(dv, u0)
    J = np.array(
        [[su.get((1, 0), 0.0), su.get((0, 1), 0.0)], [sv.get((1, 0), 0.0), sv.get((0, 1), 0.0)]]
    )
    lam = J[0, 0] + J[1, 1]
    w, V = np.linalg.eig(J)
    i0 = int(np.argmin(np.abs(w)))
    e0, el = np.real(V[:, i0]), np.real(V[:, 1 - i0])
    T = np.column_stack([e0, el])
    Tinv = np.linalg.inv(T)

    # U = T00 c + T01 h, v = T10 c + T11 h
    def lin(a0, a1):
        M = np.zeros((N + 1, N + 1))
        M[1, 0], M[0, 1] = a0, a1
        return M

    Uc, Vc = lin(T[0, 0], T[0, 1]), lin(T[1, 0], T[1, 1])

    def compose(series):
        out = np.zeros((N + 1, N + 1))
        upow = [np.eye(1, N + 1, 0).reshape(1, -1).repeat(N + 1, 0) * 0]
        upow = [np.zeros((N + 1, N + 1))]
        upow[0][0, 0] = 1.0
        max_a = max((a for a, _ in series), default=0)
        max_b = max((b for _, b in series), default=0)
        for _ in range(max_a):
            upow.append(_poly2_mul(upow[-1], Uc, N))
        vpow = [upow[0].copy()]
        for _ in range(max_b):
            vpow.append(_poly2_mul(vpow[-1], Vc, N))
        for (a, b), c in series.items():
            if a + b > N:
                continue
            out += c * _poly2_mul(upow[a], vpow[b], N)
        return out

    FU, FV = compose(su), compose(sv)
    Fc = Tinv[0, 0] * FU + Tinv[0, 1] * FV
    Fh = Tinv[1, 0] * FU + Tinv[1, 1] * FV

    def on_manifold(F, phi):
        out = np.zeros(N + 1)
        hp = np.zeros(N + 1)
        hp[0] = 1.0
        for b in range(N + 1):
            if b:
                hp = np.convolve(hp, phi)[: N + 1]
            col = F[:, b]
            if not np.any(col):
                continue
            out += np.convolve(col, hp)[: N + 1]
        return out

    phi = np.zeros(N + 1)
    for _ in range(N):
        fc = on_manifold(Fc, phi)
        gh = on_manifold(Fh, phi) - lam * phi
        dphi = np.zeros(N + 1)
        dphi[:-1] = np.arange(1, N + 1) * phi[1:]
        new = (np.convolve(dphi, fc)[: N + 1] - gh) / lam
        new[:2] = 0.0
        if np.allclose(new, phi, rtol=0, atol=0):
            break
        phi = new
    red = on_manifold(Fc, phi)
    scale = max(1.0, float(np.max(np.abs(Fc))))
    for m in range(2, N + 1):
        if abs(red[m]) > 1e-9 * scale:
            if m % 2 == 0:
                return "degenerate"
            return "node" if red[m] * lam > 0 else "saddle"
    return "degenerate"


def _classify_point(du: dict, dv: dict, u0: float) -> tuple[str, bool, tuple[float, float], str]:
    """Return (type, hyperbolic, eigenvalues, linear_kind)."""
    J = _linear_part(du, dv, u0)
    ev = np.linalg.eigvals(J)
    scale = max(1.0, float(np.max(np.abs(J))))
    zero = [abs(e) <= 1e-10 * scale for e in ev]
    eig = (float(np.real(ev[0])), float(np.real(ev[1])))
    if not any(zero):
        det = float(np.real(ev[0] * ev[1]))
        return ("node" if det > 0 else "saddle"), True, eig, "hyperbolic"
    if all(zero):
        kind = "zero" if np.max(np.abs(J)) <= 1e-12 * scale else "nilpotent"
        return "degenerate", False, eig, kind
    return _semi_hyperbolic_type(du, dv, u0), False, eig, "semi-hyperbolic"


def _envelope_weights(p: ParamPolynomial, q: ParamPolynomial) -> tuple[int, int] | None:
    """Quasi-homogeneous weights ``(a, b)``, ``a > b``, for the x-direction.

    With ``x ~ v^-a, y ~ v^-b`` every term of ``u'`` has exponent
    ``alpha + beta * (a/b)``; the chosen ratio is the first breakpoint of the
    lower envelope where two distinct powers of ``u`` are dominant together.
    """
    lines = []  # (alpha, beta, u_power) with exponent = alpha + beta * r, b = 1
    for (i, j), c in q.items():
        lines.append((Fraction(1 - j), Fraction(-i), j))
    for (i, j), c in p.items():
        lines.append((Fraction(-j), Fraction(1 - i), j + 1))
    cands = set()
    for a1, b1, _ in lines:
        for a2, b2, _ in lines:
            if b1 != b2:
                r = (a2 - a1) / (b1 - b2)
                if r > 1:
                    cands.add(r)
    for r in sorted(cands):
        vals = [(al + be * r, up) for al, be, up in lines]
        low = min(v for v, _ in vals)
        powers = {up for v, up in vals if v == low}
        if len(powers) >= 2:
            return r.numerator, r.denominator
    return None


def _swap_xy(p: ParamPolynomial, q: ParamPolynomial) -> tuple[ParamPolynomial, ParamPolynomial]:
    sw = lambda f: ParamPolynomial({(j, i): c for (i, j), c in f.items()})  # noqa: E731
    return sw(q), sw(p)


def classify_infinity(sys: PlanarSystem, a: Mapping[str, object] | None = None) -> list[InfinitySingularity]:
    """Singular points on the Poincare circle, one entry per +/- direction pair.

    Each direction is a real root of ``x*Q_d - y*P_d``.  The point is
    linearised in the standard chart; points with one zero eigenvalue are
    typed by center-manifold reduction.  An axis direction with vanishing
    linear part is re-examined in a quasi-homogeneous chart; it is reported as
    a saddle only when that chart shows a single singular point of saddle
    type, and as degenerate otherwise.
    """
    p, q = numeric_system(sys, a)
    d = max(p.degree, q.degree)
    if d < 0:
        raise ShapeError("zero vector field")
    G = X * q.homogeneous_part(d) - Y * p.homogeneous_part(d)
    if G.is_zero():
        raise ShapeError("top-degree form x*Q_d - y*P_d vanishes identically")

    out: list[InfinitySingularity] = []
    # slopes u = y/x with G(1, u) = 0
    g1 = [Fraction(0)] * (d + 2)
    for (i, j), c in G.items():
        g1[j] += c.constant
    has_y_dir = G.coefficient(0, d + 1).is_zero()
    slopes = [] if all(c == 0 for c in g1) else _real_roots(g1)

    du1, dv1 = _chart_field(p, q, 1, 1)
    for s in slopes:
        u0 = float(s)
        kind, hyp, eig, lin = _classify_point(du1, dv1, u0)
        if lin == "zero" and u0 == 0.0:
            kind = _weighted_type(p, q)
        norm = math.hypot(1.0, u0)
        out.append(InfinitySingularity((1.0 / norm, u0 / norm), kind, hyp, "U1", eig))
    if has_y_dir:
        ps, qs = _swap_xy(p, q)
        du2, dv2 = _chart_field(ps, qs, 1, 1)
        kind, hyp, eig, lin = _classify_point(du2, dv2, 0.0)
        if lin == "zero":
            kind = _weighted_type(ps, qs)
        out.append(InfinitySingularity((0.0, 1.0), kind, hyp, "U2", eig))
    return sorted(out, key=lambda s: math.atan2(s.direction[1], s.direction[0]))


def _weighted_type(p: ParamPolynomial, q: ParamPolynomial) -> str:
    w = _envelope_weights(p, q)
    if w is None:
        return "degenerate"
    du, dv = _chart_field(p, q, *w)
    f = [Fraction(0)] * (1 + max((a for a, e in du if e == 0), default=0))
    for (a, e), c in du.items():
        if e == 0:
            f[a] += c
    if all(c == 0 for c in f):
        return "degenerate"
    roots = _real_roots(f)
    if len(roots) != 1:
        return "degenerate"
    kind, _, _, _ = _classify_point(du, dv, float(roots[0]))
    return "saddle" if kind == "saddle" else "degenerate"
