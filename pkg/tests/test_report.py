import json
import math

import numpy as np

from palab.conditions import pa_ratio_profile
from palab.maps import TableMap
from palab.metric import INF, discrete_space
from palab.report import approx, build_report, claim, dumps, exact, profile_csv


def test_dumps_handles_special_values():
    out = json.loads(dumps({"a": math.nan, "b": math.inf, "c": INF, "d": np.int64(3), "e": np.array([1.5])}))
    assert out == {"a": None, "b": "inf", "c": "inf", "d": 3, "e": [1.5]}


def test_report_fields():
    X = discrete_space(3)
    rep = build_report("check", space=X, map=TableMap(X, (1, 2, 2)), verdict="violated",
                       measurements=[exact("x", 1, 1, "trivial")], notes=["n"])
    assert list(rep) == ["schema_version", "command", "space", "map", "spec", "verdict", "witness",
                         "measurements", "notes"]
    assert rep["measurements"][0]["pass"] is True
    assert set(rep["measurements"][0]) >= {"name", "value", "expected", "provenance", "tolerance", "pass"}


def test_measurement_helpers():
    assert approx("a", 1.0 + 1e-13, 1.0, 1e-12, "derived").passed
    assert not approx("a", 1.1, 1.0, 1e-3, "derived", relative=True).passed
    m = claim("c", 0.6, "<= 0.4", False, "paper", discrepancy=True)
    assert m.discrepancy and not m.passed


def test_profile_csv():
    X = discrete_space(3)
    text = profile_csv(pa_ratio_profile(X, TableMap(X, (1, 2, 2)), 1, 2, 3))
    lines = text.splitlines()
    assert lines[0] == "n,S_n,S1_n,rho_n"
    assert lines[1] == "1,1.0,0.0,0.0"
    assert lines[2] == "2,1.0,0.0,0.0"
    X2 = discrete_space(2)
    text = profile_csv(pa_ratio_profile(X2, TableMap(X2, (0, 0)), 1, 1, 2))
    assert text.splitlines()[1] == "1,0.0,0.0,"
