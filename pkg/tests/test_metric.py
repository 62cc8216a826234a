import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from palab.errors import DomainMismatch, InvalidSpec, OutOfRange
from palab.metric import (
    INF,
    FiniteSpace,
    HarmonicSpace,
    IntervalSpace,
    discrete_space,
    load_finite_space,
    verify_metric_axioms,
)
from palab.search import RandomSpaceSpec, metric_repair, random_finite_metric


def exact_harmonic(m, n):
    rm = Fraction(0) if m is INF else Fraction(1, m)
    rn = Fraction(0) if n is INF else Fraction(1, n)
    return abs(rm - rn)


def test_discrete_distances():
    X = discrete_space(3)
    assert [X.distance(0, j) for j in range(3)] == [0.0, 1.0, 1.0]
    assert verify_metric_axioms(X).passed


def test_harmonic_distances():
    X = HarmonicSpace(100)
    assert X.distance(2, 4) == 0.25
    assert X.distance(5, INF) == 0.2
    assert X.distance(INF, INF) == 0.0


def test_harmonic_brute_force_triangle():
    # exact rational oracle over every triple of 1..100 plus infinity
    X = HarmonicSpace(100)
    pts = list(range(1, 101)) + [INF]
    exact = np.array([[float(exact_harmonic(a, b)) for b in pts] for a in pts])
    # reciprocals round before subtracting, so compare to within an ulp of 1
    # all 101^3 triples against the exactly rounded distance matrix
    slack = exact[:, :, None] + exact[None, :, :] - exact[:, None, :]
    assert slack.min() >= -1e-15
    for a, b in itertools.product(pts, repeat=2):
        assert X.distance(a, b) == pytest.approx(exact[pts.index(a), pts.index(b)], rel=0, abs=2.3e-16)
    rep = verify_metric_axioms(X, triple_sample_size=20000)
    assert rep.passed and not rep.exhaustive and rep.triples_checked == 20000


def test_interval_axioms_exhaustive():
    rep = verify_metric_axioms(IntervalSpace(0, 1, 33))
    assert rep.passed and rep.exhaustive and rep.triples_checked == 33**3


def test_violation_reported():
    m = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    rep = verify_metric_axioms(FiniteSpace(m))
    assert not rep.passed
    assert rep.axiom == "triangle"
    x, y, z = rep.witness
    assert m[x, z] > m[x, y] + m[y, z]


def test_indiscernibles_violation():
    m = np.array([[0, 0, 1], [0, 0, 1], [1, 1, 0]], dtype=float)
    rep = verify_metric_axioms(FiniteSpace(m))
    assert rep.axiom == "indiscernibles"


@pytest.mark.parametrize(
    "matrix",
    [
        [[0, 1], [2, 0]],
        [[1, 1], [1, 0]],
        [[0, -1], [-1, 0]],
        [[0, 1, 1], [1, 0, 1]],
    ],
)
def test_finite_space_rejects(matrix):
    with pytest.raises(InvalidSpec):
        FiniteSpace(np.array(matrix, dtype=float))


def test_domain_errors():
    with pytest.raises(DomainMismatch):
        discrete_space(3).distance(0.5, 1)
    with pytest.raises(OutOfRange):
        discrete_space(3).distance(0, 3)
    with pytest.raises(OutOfRange):
        IntervalSpace(0, 1).distance(0.5, 1.5)
    with pytest.raises(OutOfRange):
        HarmonicSpace(10).distance(11, 1)
    with pytest.raises(DomainMismatch):
        HarmonicSpace(10).distance(0.5, 1)


def test_enumerate_points():
    assert HarmonicSpace(100).enumerate_points(5) == [1, 2, 3, 4, INF]
    assert IntervalSpace(0, 1, 5).enumerate_points(100) == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_load_finite_space(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("0,1,2\n1,0,1.0000000000001\n2,1,0\n")
    X = load_finite_space(p)
    assert X.distance(1, 2) == X.distance(2, 1)
    p.write_text("0,1\n1.5,0\n")
    with pytest.raises(InvalidSpec):
        load_finite_space(p)


def test_metric_repair_matches_shortest_paths():
    m = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    r = metric_repair(m)
    assert r[0, 2] == 2.0
    assert verify_metric_axioms(FiniteSpace(r)).passed


@given(st.integers(2, 20), st.integers(0, 2**31), st.sampled_from(["euclidean", "repaired"]))
def test_random_metrics_satisfy_axioms(n, seed, method):
    X = random_finite_metric(RandomSpaceSpec(n, method, seed))
    assert verify_metric_axioms(X).passed


@given(st.lists(st.integers(1, 50) | st.just(INF), min_size=3, max_size=3))
def test_harmonic_symmetry_and_triangle(pts):
    X = HarmonicSpace(50)
    a, b, c = pts
    assert X.distance(a, b) == X.distance(b, a)
    assert X.distance(a, c) <= X.distance(a, b) + X.distance(b, c) + 1e-15


@given(st.floats(0, 1), st.floats(0, 1))
def test_pairwise_matches_scalar(x, y):
    X = IntervalSpace(0, 1)
    assert X.pairwise(np.array([x]), np.array([y]))[0] == X.distance(x, y)
