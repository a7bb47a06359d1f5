import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from schwarzlab.formats import (ParseError, atomic_write, csv_text, fmt, json_text, parse_domain,
                                density_function, parse_measure, read_measure, write_csv)
from schwarzlab.measure import total_mass

MEASURE = """
# a test measure
[density]
1 + 0.5*cos(theta)**2
  - sin(2*theta)
[atoms]
0      1.0
pi/2   0.5   # quarter turn
[cantor]
depth = 3
mass = 0.25
arc = 0, pi
"""


def test_parse_measure():
    mu = parse_measure(MEASURE)
    assert len(mu.atoms) == 2
    assert mu.singular.depth == 3 and mu.singular.arc[1] == pytest.approx(math.pi)
    assert mu.density(np.array([0.0]))[0] == pytest.approx(1.5)
    assert total_mass(mu).real == pytest.approx(1.25 + 1.5 + 0.25)


@pytest.mark.parametrize("text,line,needle", [
    ("[density]\nexp(theta)\n", 2, "unsupported function 'exp'"),
    ("[atoms]\n0\n", 2, "angle mass"),
    ("1 2\n", 1, "before the first section"),
    ("[stuff]\n", 1, "unknown section"),
    ("[atoms]\n0 1\n[atoms]\n", 3, "twice"),
    ("[cantor]\nmass = 1\n", 2, "needs 'depth'"),
    ("[density]\n1/(theta - theta)\n", 2, "not finite"),
    ("[atoms]\ntheta 1\n", 2, ""),
])
def test_parse_errors(text, line, needle):
    with pytest.raises(ParseError) as exc:
        parse_measure(text)
    assert exc.value.line == line
    assert needle in str(exc.value)


def test_error_carries_path(tmp_path):
    p = tmp_path / "bad.measure"
    p.write_text("[density]\n__import__('os')\n")
    with pytest.raises(ParseError) as exc:
        read_measure(p)
    assert str(exc.value).startswith(f"{p}:2:")


def test_domain():
    d = parse_domain("slit 10 20\n# c\nslit 1 2\nhalfline 1e6\n")
    assert d.slits == ((1.0, 2.0), (10.0, 20.0), (1e6, math.inf))
    for bad in ("slit 2 1\n", "ring 1 2\n", "", "slit 1 3\nslit 2 4\n"):
        with pytest.raises(ParseError):
            parse_domain(bad)


@given(st.floats(-1e300, 1e300))
def test_fmt_round_trip(x):
    assert float(fmt(x)) == x


def test_fmt_special():
    assert fmt(math.inf) == "inf" and fmt(True) == "true" and fmt(None) == ""


def test_json_non_finite():
    doc = json.loads(json_text({"b": math.nan, "a": [1 + 2j, np.float64(0.5), np.int64(3)]}))
    assert doc == {"a": [[1.0, 2.0], 0.5, 3], "b": "nan"}
    assert json_text({"b": 1, "a": 2}).index('"a"') < json_text({"b": 1, "a": 2}).index('"b"')


def test_atomic_write(tmp_path):
    p = tmp_path / "sub" / "x.csv"
    write_csv(p, ("a", "b"), [(1, 0.1), (2, math.pi)])
    assert p.read_text() == "a,b\n1,0.10000000000000001\n2,3.1415926535897931\n"
    atomic_write(p, "new\n")
    assert p.read_text() == "new\n"
    assert [x.name for x in p.parent.iterdir()] == ["x.csv"]


@given(st.floats(-10, 10))
def test_expression_evaluator(x):
    f = density_function("2*cos(theta)**2 - 1 + sin(pi/2)")
    assert f(np.array([x]))[0] == pytest.approx(math.cos(2 * x) + 1, abs=1e-12)
