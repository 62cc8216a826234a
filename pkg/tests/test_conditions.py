import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from palab.conditions import (
    F_FUNCTIONS,
    ConditionSpec,
    Family,
    check_condition,
    check_f_admissible,
    evaluate_condition,
    pa_ratio_profile,
    sample_pairs,
    tightest_constant,
)
from palab.errors import AllDegenerate, EmptySample, InvalidSpec
from palab.maps import SquareHalfMap, SuccessorMap, TableMap, constant_map, identity_map
from palab.metric import INF, FiniteSpace, HarmonicSpace, IntervalSpace, discrete_space
from palab.search import RandomSpaceSpec, contractive_instances, random_finite_metric

EX_PAIRS = [(0, 1), (0, 2), (1, 2)]


@pytest.fixture
def example():
    X = discrete_space(3)
    return X, TableMap(X, (1, 2, 2))


def brute_sums(X, T, x, y, H):
    """Orbit sums by direct iteration, the oracle for the vectorised path."""
    D = [X.distance(T.iterate(x, k), T.iterate(y, k)) for k in range(H + 1)]
    S = [math.fsum(D[:n]) for n in range(1, H + 1)]
    S1 = [math.fsum(D[1 : n + 1]) for n in range(1, H + 1)]
    return D, S, S1


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(family="banach", k=1.0),
        dict(family="kannan", k=0.5),
        dict(family="chatterjea", k=0.0),
        dict(family="ciric"),
        dict(family="pa", alpha=0.5, N=3, H=2),
        dict(family="pa", alpha=1.0, N=1, H=2),
        dict(family="f", f_id="log", tau=0.0),
        dict(family="f", f_id="exp", tau=0.1),
    ],
)
def test_spec_ranges(kwargs):
    with pytest.raises(InvalidSpec):
        ConditionSpec(**kwargs)


def test_example_pair_sums(example):
    X, T = example
    expect = {(0, 1): (1.0, 2.0), (0, 2): (1.0, 2.0), (1, 2): (0.0, 1.0)}
    for pair, (s1, s) in expect.items():
        S, S1, _ = pa_ratio_profile(X, T, *pair, 16).at(2)
        assert (S1, S) == (s1, s)


def test_example_pa_and_banach(example):
    X, T = example
    assert check_condition(ConditionSpec.pa(0.5, 2, 16), X, T, EX_PAIRS).holds
    rep = check_condition(ConditionSpec.pa(0.5, 1, 16), X, T, EX_PAIRS)
    assert not rep.holds and rep.witness.pair == (0, 1) and rep.witness.n == 1
    b = tightest_constant(Family.BANACH, X, T, EX_PAIRS)
    assert b.estimate == 1.0 and b.witness.pair == (0, 1)


def test_kannan_refutation():
    X = IntervalSpace(0, 1)
    v = evaluate_condition(ConditionSpec(Family.KANNAN, k=0.49), X, SquareHalfMap(X), 1.0, 0.0)
    assert (v.lhs, v.kernel) == (0.5, 0.5)
    assert v.lhs / v.kernel == 1.0
    assert not v.holds


def test_witness_is_lexicographically_first():
    from fractions import Fraction as Fr

    X = HarmonicSpace(200)
    T = SuccessorMap(X)
    pairs = [(n, n + 1) for n in range(1, 60)][::-1]
    rep = check_condition(ConditionSpec.pa(0.9, 2, 100), X, T, pairs)

    # exact oracle: first pair, then first n, with S1 > 0.9 S
    def first_violation():
        for m in range(1, 60):
            for n in range(2, 101):
                s = Fr(1, m) - Fr(1, m + n)
                s1 = Fr(1, m + 1) - Fr(1, m + n + 1)
                if s1 > Fr(9, 10) * s:
                    return m, n, s1, Fr(9, 10) * s

    m, n, s1, rhs = first_violation()
    assert rep.witness.pair == (m, m + 1) and rep.witness.n == n
    assert rep.witness.lhs == pytest.approx(float(s1), rel=1e-12)
    assert rep.witness.rhs == pytest.approx(float(rhs), rel=1e-12)


def test_successor_pa_witness_at_14():
    X = HarmonicSpace(100)
    rep = check_condition(ConditionSpec.pa(0.9, 2, 20), X, SuccessorMap(X), [(14, 15)])
    assert not rep.holds and rep.witness.n == 14


def test_empty_and_degenerate_samples():
    X = discrete_space(3)
    with pytest.raises(EmptySample):
        check_condition(ConditionSpec(Family.BANACH, k=0.5), X, identity_map(X), [])
    with pytest.raises(AllDegenerate):
        tightest_constant(Family.PA, X, identity_map(X), [(1, 1)], N=1, H=4)
    with pytest.raises(AllDegenerate):
        tightest_constant(Family.F, X, constant_map(X), EX_PAIRS)
    r = tightest_constant(Family.BANACH, X, constant_map(X), EX_PAIRS)
    assert r.estimate == 0.0 and r.skipped_count == 0


def test_positive_over_zero_is_infinite():
    # the identity has d(Tx,Ty) > 0 while the Kannan kernel is zero
    X = discrete_space(3)
    r = tightest_constant(Family.KANNAN, X, identity_map(X), EX_PAIRS)
    assert r.estimate == math.inf and r.skipped_count == 0
    r = tightest_constant(Family.BANACH, X, identity_map(X), EX_PAIRS)
    assert r.estimate == 1.0


def test_zero_over_zero_is_skipped():
    X = discrete_space(3)
    r = tightest_constant(Family.PA, X, TableMap(X, (1, 2, 2)), [(0, 1), (1, 1)], N=2, H=6)
    assert r.estimate == 0.5
    assert r.skipped_count == 5 and r.defined_count == 5


def test_sample_pairs_schemes():
    X = IntervalSpace(0, 1, 11)
    assert len(sample_pairs(X)) == 55
    assert len(sample_pairs(X, scheme="adjacent")) == 10
    assert all(min(p) >= 0.8 - 1e-12 for p in sample_pairs(X, window=(0.8, 1.0)))
    big = sample_pairs(IntervalSpace(0, 1, 1001), seed=3)
    assert big == sample_pairs(IntervalSpace(0, 1, 1001), seed=3)
    assert (0.999, 1.0) in big
    H = sample_pairs(HarmonicSpace(100), limit=10)
    assert len(H) == 55 and (10, INF) in H


@pytest.mark.parametrize("f_id", sorted(F_FUNCTIONS))
def test_f_functions_admissible(f_id):
    assert all(check_f_admissible(F_FUNCTIONS[f_id]).values())


def test_f_contraction_square_half_window():
    X = IntervalSpace(0, 1)
    T = SquareHalfMap(X)
    w = sample_pairs(X, window=(0.99, 1.0))
    tau = tightest_constant(Family.F, X, T, w).estimate
    # F = ln: F(d) - F(d(Tx,Ty)) = -ln((x+y)/2), smallest at x, y near 1
    oracle = min(-math.log((x + y) / 2) for x, y in w)
    assert tau == pytest.approx(oracle, rel=1e-9)


@given(st.integers(2, 8), st.integers(0, 2**31), st.data())
def test_sums_match_brute_force(n, seed, data):
    X = random_finite_metric(RandomSpaceSpec(n, "euclidean", seed))
    table = data.draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    T = TableMap(X, tuple(table))
    x, y = data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1))
    H = data.draw(st.integers(1, 12))
    p = pa_ratio_profile(X, T, x, y, H)
    D, S, S1 = brute_sums(X, T, x, y, H)
    assert np.allclose(p.S, S, rtol=1e-12, atol=1e-15)
    assert np.allclose(p.S1, S1, rtol=1e-12, atol=1e-15)
    # monotone, nonnegative ratios, and the shift identity
    assert np.all(np.diff(p.S) >= 0)
    assert np.all(p.rho[~np.isnan(p.rho)] >= 0)
    for m in range(1, H):
        assert p.S1[m - 1] == pytest.approx(p.S[m] - D[0], abs=1e-12)


@given(st.integers(1, 300), st.integers(1, 60))
def test_successor_sums_closed_form(m, n):
    X = HarmonicSpace(1000)
    p = pa_ratio_profile(X, SuccessorMap(X), m, m + 1, n)
    S, S1, rho = p.at(n)
    assert S == pytest.approx(1 / m - 1 / (m + n), rel=1e-12)
    assert S1 == pytest.approx(1 / (m + 1) - 1 / (m + n + 1), rel=1e-12)


@given(st.integers(0, 2**31))
def test_banach_implies_pa(seed):
    (X, T, k), = contractive_instances(1, seed=seed, max_points=8)
    pairs = sample_pairs(X)
    assert check_condition(ConditionSpec.pa(k, 1, 15), X, T, pairs).holds
    assert tightest_constant(Family.PA, X, T, pairs, N=1, H=15).estimate <= k + 1e-12


@given(st.floats(0.05, 0.95))
def test_pa_check_agrees_with_tightest(alpha):
    X = HarmonicSpace(400)
    T = SuccessorMap(X)
    pairs = [(n, n + 1) for n in range(1, 30)]
    hat = tightest_constant(Family.PA, X, T, pairs, N=2, H=40).estimate
    holds = check_condition(ConditionSpec.pa(alpha, 2, 40), X, T, pairs).holds
    assert holds == (alpha >= hat - 1e-12)
