"""Plain-text system description files.

Grammar (``#`` starts a comment, blank lines are ignored)::

    family = canonical_2_1
    parameters = mu1, mu3
    degree = 1 3            # degrees of p and q
    [p]
    0 1 = 1                 # x-degree y-degree = coefficient
    [q]
    1 0 = -1
    0 1 = mu1
    0 2 = 1
    0 3 = mu3
    [assignment]            # optional; floats allowed here only
    mu1 = 0.1
    mu3 = -1

Coefficients are affine forms with exact rational numbers written as
integers or ``p/q``, e.g. ``3/2``, ``-1/2*alpha + 1``, ``lambda - mu``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, InputError
from .polysys import (
    FAMILIES,
    ParamCoefficient,
    ParameterAssignment,
    ParamPolynomial,
    PlanarSystem,
)

HEADER_KEYS = ("family", "parameters", "degree")
SECTIONS = ("p", "q", "assignment")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*$")


@dataclass(frozen=True)
class SystemDescription:
    system: PlanarSystem
    assignment: ParameterAssignment | None = None


def parse_description(text: str) -> SystemDescription:
    header: dict[str, tuple[str, int]] = {}
    tables: dict[str, dict] = {"p": {}, "q": {}}
    assignment: dict[str, float] | None = None
    section = None
    seen_sections: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[(\w+)\]", line)
        if m:
            section = m.group(1)
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno, section)
            if section in seen_sections:
                raise ConfigError(f"duplicate section [{section}]", lineno, section)
            seen_sections.add(section)
            if section == "assignment":
                assignment = {}
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if section is None:
            if key not in HEADER_KEYS:
                raise ConfigError("unknown field", lineno, key)
            if key in header:
                raise ConfigError("duplicate field", lineno, key)
            header[key] = (value, lineno)
        elif section in ("p", "q"):
            parts = key.split()
            if len(parts) != 2 or not all(p.isdigit() for p in parts):
                raise ConfigError("monomial key must be two non-negative integers 'i j'", lineno, key)
            mono = (int(parts[0]), int(parts[1]))
            if mono in tables[section]:
                raise ConfigError("duplicate monomial", lineno, key)
            try:
                tables[section][mono] = (ParamCoefficient.parse(value, allow_decimal=False), lineno)
            except InputError as exc:
                raise ConfigError(str(exc), lineno, key) from None
        else:
            if not _NAME.match(key):
                raise ConfigError("bad parameter name", lineno, key)
            if key in assignment:
                raise ConfigError("duplicate assignment", lineno, key)
            try:
                assignment[key] = float(value)
            except ValueError:
                raise ConfigError(f"not a number: {value!r}", lineno, key) from None

    for key in HEADER_KEYS:
        if key not in header:
            raise ConfigError("missing required field", None, key)
    family, fl = header["family"]
    if family not in FAMILIES:
        raise ConfigError(f"unknown family tag {family!r}", fl, "family")
    ptext, pl = header["parameters"]
    params = tuple(n.strip() for n in ptext.split(",") if n.strip())
    for n in params:
        if not _NAME.match(n):
            raise ConfigError(f"bad parameter name {n!r}", pl, "parameters")
    p = ParamPolynomial({k: v for k, (v, _) in tables["p"].items()})
    q = ParamPolynomial({k: v for k, (v, _) in tables["q"].items()})
    for name, poly in (("p", p), ("q", q)):
        for mono, (coef, line) in tables[name].items():
            undeclared = coef.parameters - set(params)
            if undeclared:
                raise ConfigError(f"undeclared parameter {sorted(undeclared)[0]!r}", line, f"{mono[0]} {mono[1]}")
    dtext, dl = header["degree"]
    try:
        dp, dq = (int(v) for v in dtext.split())
    except ValueError:
        raise ConfigError("degree must be two integers 'deg_p deg_q'", dl, "degree") from None
    if (dp, dq) != (p.degree, q.degree):
        raise ConfigError(f"declared degrees ({dp}, {dq}) differ from the table ({p.degree}, {q.degree})", dl, "degree")
    try:
        system = PlanarSystem(p, q, params, family)
    except InputError as exc:
        raise ConfigError(str(exc), fl, "family") from None
    assign = None
    if assignment is not None:
        unknown = set(assignment) - set(params)
        if unknown:
            raise ConfigError(f"assignment for undeclared parameter {sorted(unknown)[0]!r}", None, "assignment")
        assign = ParameterAssignment(assignment)
    return SystemDescription(system, assign)


def _table(poly: ParamPolynomial) -> list[str]:
    keys = sorted(poly, key=lambda k: (k[0] + k[1], -k[0]))
    return [f"{i} {j} = {poly.coefficient(i, j).to_text()}" for i, j in keys]


def print_description(desc: SystemDescription | PlanarSystem, assignment=None) -> str:
    if isinstance(desc, PlanarSystem):
        desc = SystemDescription(desc, None if assignment is None else ParameterAssignment(assignment))
    sys = desc.system
    lines = [
        f"family = {sys.family}",
        f"parameters = {', '.join(sys.parameters)}",
        f"degree = {sys.p.degree} {sys.q.degree}",
        "[p]",
        *_table(sys.p),
        "[q]",
        *_table(sys.q),
    ]
    if desc.assignment is not None:
        lines.append("[assignment]")
        lines += [f"{k} = {float(v)!r}" for k, v in desc.assignment.items()]
    return "\n".join(lines) + "\n"


def load_description(path: str | Path) -> SystemDescription:
    return parse_description(Path(path).read_text())
