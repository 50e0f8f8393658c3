import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nullcontrol import ControlProblem, InputVector, explicit, heat
from nullcontrol.demos import heat_problem, strip_problems
from nullcontrol.io import (
    ProblemFormatError,
    decode_complex,
    dumps_report,
    encode_complex,
    load_problem,
    problem_from_dict,
    problem_to_dict,
    write_problem,
)


def test_minimal_singleton(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"spectrum": {"explicit": [{"re": -1, "im": 0}]}, "b": [1], "x0": [1], "t1": 1, "T": 0}))
    p = load_problem(path)
    assert p.spectrum.eigenvalues == (-1 + 0j,) and p.horizon == 1


def test_length_mismatch_names_both():
    doc = {"spectrum": {"preset": {"name": "heat", "n": 3}}, "b": [1, 1], "x0": [1, 1, 1], "t1": 0.1}
    with pytest.raises(ProblemFormatError, match="length 2 .* spectrum length 3"):
        problem_from_dict(doc)


def test_heat_preset_expands():
    doc = {"spectrum": {"preset": {"name": "heat", "n": 3}}, "b": [1, 1, 1], "x0": [1, 0.5, 0.25], "t1": 0.1, "T": 0.08}
    out = problem_to_dict(problem_from_dict(doc))
    vals = [complex(v["re"], v["im"]) for v in out["spectrum"]["explicit"]]
    assert vals == [-(j * j) * math.pi**2 for j in (1, 2, 3)]


def test_lag_defaults_for_riesz_presets_only():
    base = {"b": [1], "x0": [1], "t1": 1.0}
    p = problem_from_dict({**base, "spectrum": {"preset": {"name": "imaginary_ladder", "n": 1}}})
    assert p.settle_lag == 0
    with pytest.raises(ProblemFormatError, match="T"):
        problem_from_dict({**base, "spectrum": {"explicit": [1]}})


@pytest.mark.parametrize(
    "doc,field",
    [
        ({"b": [1], "x0": [1], "t1": 1}, "spectrum"),
        ({"spectrum": {"explicit": [1]}, "b": [True], "x0": [1], "t1": 1, "T": 0}, "b[0]"),
        ({"spectrum": {"explicit": [1]}, "b": [1], "x0": [1], "t1": "x", "T": 0}, "t1"),
        ({"spectrum": {"explicit": [1], "preset": {}}, "b": [1], "x0": [1], "t1": 1, "T": 0}, "spectrum"),
        ({"spectrum": {"explicit": [2, 1]}, "b": [1, 1], "x0": [1, 1], "t1": 1, "T": 0}, "spectrum"),
        ({"spectrum": {"explicit": [1]}, "b": [1], "x0": [1], "t1": 1, "T": 0, "extra": 1}, ""),
        ({"spectrum": {"explicit": [1]}, "b": [1], "x0": [1], "t1": 1, "T": 1}, ""),
    ],
)
def test_schema_errors(doc, field):
    with pytest.raises(ProblemFormatError) as exc:
        problem_from_dict(doc)
    assert exc.value.field == field


@pytest.mark.parametrize("p", [heat_problem(), *strip_problems()])
def test_round_trip(tmp_path, p):
    path = tmp_path / "p.json"
    write_problem(p, path)
    assert load_problem(path) == p


@settings(max_examples=100, deadline=None)
@given(st.complex_numbers(allow_nan=False, allow_infinity=False))
def test_complex_round_trip(z):
    assert decode_complex(json.loads(json.dumps(encode_complex(z)))) == z


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False), min_size=1, max_size=6),
    st.floats(0.01, 10),
)
def test_problem_round_trip_property(x0, t1):
    n = len(x0)
    p = ControlProblem(heat(n), InputVector.constant(1, n), tuple(x0), t1, t1 / 2)
    assert problem_from_dict(json.loads(json.dumps(problem_to_dict(p)))) == p


def test_report_serialization_is_stable():
    obj = {"b": 0.1 + 0.2, "a": [1e-320, complex(1, -2)], "c": math.inf}
    s = dumps_report(obj)
    assert s == dumps_report(obj)
    assert s.index('"a"') < s.index('"b"')
    assert json.loads(s)["c"] == "inf"
