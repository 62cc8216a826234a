"""Numerical laboratory for path-averaged (PA) and classical contraction conditions."""

from palab.errors import (
    AllDegenerate,
    DomainMismatch,
    EmptySample,
    InsufficientTrace,
    InvalidSpec,
    OutOfRange,
    PALabError,
    WrongFamily,
)
from palab.metric import (
    INF,
    FiniteSpace,
    HarmonicSpace,
    IntervalSpace,
    MetricSpace,
    discrete_space,
    distance,
    enumerate_points,
    verify_metric_axioms,
)
from palab.maps import (
    CustomMap,
    SelfMap,
    SquareHalfMap,
    SuccessorMap,
    TableMap,
    apply,
    iterate,
    orbit_pair_distances,
)
from palab.conditions import (
    ConditionSpec,
    Family,
    check_condition,
    evaluate_condition,
    pa_ratio_profile,
    sample_pairs,
    tightest_constant,
)
from palab.picard import check_summability_bound, find_fixed_points, run_picard

__version__ = "0.1.0"
