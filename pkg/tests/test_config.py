from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from lienard.config import SystemDescription, load_description, parse_description, print_description
from lienard.errors import ConfigError
from lienard.polysys import ParameterAssignment, build_lienard

CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.cfg"))

BASE = """family = canonical_2_1
parameters = mu1, mu3
degree = 1 3
[p]
0 1 = 1
[q]
1 0 = -1
0 1 = mu1
0 2 = 1
0 3 = mu3
"""


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.name)
def test_shipped_configs_round_trip(path):
    d1 = load_description(path)
    text = print_description(d1)
    d2 = parse_description(text)
    assert d2 == d1
    assert print_description(d2) == text


def test_shipped_config_set():
    names = {p.name for p in CONFIGS}
    assert {"lienard_k1.cfg", "lienard_k2.cfg", "lienard_k3.cfg", "rychkov.cfg", "cubic.cfg"} <= names


def test_parse_base():
    d = parse_description(BASE + "[assignment]\nmu1 = 0.1\nmu3 = -1\n")
    assert d.system.family == "canonical_2_1"
    assert d.system.parameters == ("mu1", "mu3")
    assert d.assignment == {"mu1": 0.1, "mu3": -1.0}


def test_comments_and_blank_lines():
    text = "# header\n\n" + BASE.replace("0 2 = 1", "0 2 = 1   # even term")
    assert parse_description(text).system == parse_description(BASE).system


@pytest.mark.parametrize(
    "mutation, line, field",
    [
        (lambda t: t.replace("family = canonical_2_1", "family = nope"), 1, "family"),
        (lambda t: t + "color = red\n", 11, "color"),
        (lambda t: "color = red\n" + t, 1, "color"),
        (lambda t: t.replace("0 2 = 1", "0 2 = 0.5"), 9, "0 2"),
        (lambda t: t.replace("0 3 = mu3", "0 3 = nu"), 10, "0 3"),
        (lambda t: t.replace("degree = 1 3", "degree = 1 4"), 3, "degree"),
        (lambda t: t.replace("0 1 = mu1", "0 1 = mu1\n0 1 = mu3"), 9, "0 1"),
        (lambda t: t.replace("[q]", "[r]"), 6, "r"),
        (lambda t: t.replace("0 2 = 1", "0 2 1"), 9, None),
        (lambda t: t.replace("family = canonical_2_1\n", ""), None, "family"),
    ],
)
def test_malformed_descriptions(mutation, line, field):
    with pytest.raises(ConfigError) as info:
        parse_description(mutation(BASE))
    assert info.value.line == line
    assert info.value.field == field


def test_family_validation_reports_line():
    bad = BASE.replace("0 2 = 1", "0 2 = 2")  # even coefficient must be 1 for canonical form
    with pytest.raises(ConfigError) as info:
        parse_description(bad)
    assert info.value.field == "family"


def test_assignment_errors():
    with pytest.raises(ConfigError):
        parse_description(BASE + "[assignment]\nmu1 = abc\n")
    with pytest.raises(ConfigError):
        parse_description(BASE + "[assignment]\nzeta = 1\n")


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_description("/nonexistent/missing.cfg")


rationals = st.fractions(min_value=-50, max_value=50, max_denominator=20)


@given(st.lists(rationals, min_size=5, max_size=5), st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3))
def test_round_trip_random(coefs, values):
    # odd terms symbolic, even terms fixed rationals
    sys = build_lienard(2, None, [coefs[0], coefs[1]])
    a = ParameterAssignment(dict(zip(sys.parameters, values)))
    desc = SystemDescription(sys, a)
    text = print_description(desc)
    back = parse_description(text)
    assert back.system == sys
    assert dict(back.assignment) == dict(a)
    assert print_description(back) == text
