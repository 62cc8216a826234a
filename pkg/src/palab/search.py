"""Random finite metric spaces and self-maps, empirical classification, and
seeded searches for instances separating two sets of contraction classes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import floyd_warshall

from palab.conditions import (
    F_FUNCTIONS,
    RATIO_FAMILIES,
    Family,
    pa_sums,
    pa_tightest_from_sums,
    pointwise_terms,
    pointwise_tightest,
    sample_pairs,
    _prepare,
)
from palab.errors import AllDegenerate, InvalidSpec
from palab.maps import SelfMap, TableMap, pair_tables
from palab.metric import EPS, FiniteSpace, MetricSpace, point_to_json

METHODS = ("euclidean", "repaired")
BOUNDARY_BAND = 10 * EPS
REFINEMENT_SHRINK = 0.5


@dataclass(frozen=True)
class RandomSpaceSpec:
    point_count: int
    method: str = "euclidean"
    seed: int = 0

    def __post_init__(self):
        if not 2 <= self.point_count <= 64:
            raise InvalidSpec(f"point_count must lie in [2, 64], got {self.point_count}")
        if self.method not in METHODS:
            raise InvalidSpec(f"method must be one of {METHODS}, got {self.method!r}")


def metric_repair(matrix) -> np.ndarray:
    """Shortest-path closure of a symmetric positive weight matrix."""
    m = np.asarray(matrix, dtype=float)
    d = floyd_warshall(m, directed=False)
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return d


def random_finite_metric(spec: RandomSpaceSpec) -> FiniteSpace:
    rng = np.random.default_rng(spec.seed)
    n = spec.point_count
    if spec.method == "euclidean":
        pts = rng.random((n, 2))
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    else:
        d = rng.uniform(0.05, 1.0, size=(n, n))
        d = metric_repair(np.triu(d, 1) + np.triu(d, 1).T)
    upper = np.triu(d, 1)
    return FiniteSpace(upper + upper.T)


def random_self_map(point_count: int, seed: int, space: FiniteSpace | None = None) -> TableMap:
    """Uniformly random table map; the discrete space is used when none is given."""
    if point_count < 1:
        raise InvalidSpec("point_count must be >= 1")
    if space is None:
        space = FiniteSpace(1.0 - np.eye(point_count))
    rng = np.random.default_rng(seed)
    return TableMap(space, tuple(rng.integers(0, point_count, size=point_count).tolist()))


# ----------------------------------------------------------------------------
# classification

MEMBER = "member"
NON_MEMBER = "non-member"
BOUNDARY = "boundary"


@dataclass(frozen=True)
class FamilyVerdict:
    family: Family
    constant: float
    verdict: str
    boundary: bool
    N: int | None = None
    f_id: str | None = None
    degenerate: bool = False
    witness: object = None

    @property
    def member(self) -> bool:
        return self.verdict == MEMBER

    def to_json(self) -> dict:
        c = self.constant
        return {
            "family": self.family.value,
            "constant": c if np.isfinite(c) else ("inf" if c > 0 else "-inf"),
            "verdict": self.verdict,
            "boundary": self.boundary,
            "N": self.N,
            "f_id": self.f_id,
            "degenerate": self.degenerate,
            "witness": self.witness.to_json() if self.witness is not None else None,
        }


def _gap(family: Family, c: float) -> float:
    return c - family.bound if family is Family.F else family.bound - c


def _verdict(family: Family, c: float, coarse: float | None = None) -> tuple[str, bool]:
    """member / non-member / boundary for a measured constant.

    ``coarse`` is the same constant measured on a coarser sample of an
    infinite domain.  When refining the sample at least halves the distance
    to the family's bound, the supremum is treated as sitting on the bound
    and the verdict is ``boundary`` instead of ``member``.
    """
    gap = _gap(family, c)
    boundary = abs(gap) <= BOUNDARY_BAND
    if gap <= EPS:
        return NON_MEMBER, boundary
    if coarse is not None and gap < REFINEMENT_SHRINK * _gap(family, coarse):
        return BOUNDARY, True
    return MEMBER, boundary


@dataclass(frozen=True)
class Classification:
    verdicts: dict

    def __getitem__(self, family) -> FamilyVerdict:
        return self.verdicts[Family(family)]

    def members(self) -> set[Family]:
        return {f for f, v in self.verdicts.items() if v.member}

    def to_json(self) -> dict:
        return {f.value: v.to_json() for f, v in self.verdicts.items()}


def classify(
    space: MetricSpace,
    map: SelfMap,
    N_range: Iterable[int] = range(1, 6),
    H: int | None = None,
    *,
    pairs: Sequence[tuple] | None = None,
    pa_pairs: Sequence[tuple] | None = None,
    coarse: "Classification | None" = None,
    families: Iterable[Family] = tuple(Family),
) -> Classification:
    """Tightest constant and membership verdict for each family.

    Finite spaces default to all pairs and ``H = point_count + 8``.  The PA
    constant is the least ``alpha`` over ``N`` in ``N_range``.  F uses the
    best of the built-in ``F`` functions.  A sample where every instance is
    0/0 is vacuously a member with constant 0.  ``coarse`` is the
    classification of the same map on a coarser sample (see ``_verdict``).
    """
    families = [Family(f) for f in families]

    def ref(fam):
        if coarse is None or fam not in coarse.verdicts:
            return None
        return coarse[fam].constant

    if pairs is None:
        pairs = sample_pairs(space)
    pairs = _prepare(pairs)
    if H is None:
        if not space.is_finite:
            raise InvalidSpec("H is required for infinite spaces")
        H = space.n + 8
    out = {}
    pointwise = [f for f in families if f is not Family.PA]
    if pointwise:
        terms = pointwise_terms(space, map, pairs)
    for fam in pointwise:
        if fam is Family.F:
            best = None
            for f_id in F_FUNCTIONS:
                try:
                    r = pointwise_tightest(fam, terms, f_id)
                except AllDegenerate:
                    out[fam] = FamilyVerdict(fam, np.inf, MEMBER, False, f_id=f_id, degenerate=True)
                    break
                if best is None or r.estimate > best.estimate:
                    best = r
                    best_id = f_id
            else:
                v, b = _verdict(fam, best.estimate, ref(fam))
                out[fam] = FamilyVerdict(fam, best.estimate, v, b, f_id=best_id, witness=best.witness)
            continue
        try:
            r = pointwise_tightest(fam, terms)
        except AllDegenerate:
            out[fam] = FamilyVerdict(fam, 0.0, MEMBER, False, degenerate=True)
            continue
        v, b = _verdict(fam, r.estimate, ref(fam))
        out[fam] = FamilyVerdict(fam, r.estimate, v, b, witness=r.witness)
    if Family.PA in families:
        pp = _prepare(pa_pairs) if pa_pairs is not None else pairs
        tables = pair_tables(space, map, pp, H)
        S, S1 = pa_sums(tables.D, H)
        best = None
        for N in N_range:
            if N > H:
                break
            try:
                r = pa_tightest_from_sums(pp, S, S1, N)
            except AllDegenerate:
                best = None
                out[Family.PA] = FamilyVerdict(Family.PA, 0.0, MEMBER, False, N=N, degenerate=True)
                break
            if best is None or r.estimate < best.estimate:
                best = r
        if best is not None:
            v, b = _verdict(Family.PA, best.estimate, ref(Family.PA))
            out[Family.PA] = FamilyVerdict(Family.PA, best.estimate, v, b, N=best.N, witness=best.witness)
    return Classification(out)


# ----------------------------------------------------------------------------
# separation search

@dataclass(frozen=True)
class SeparationQuery:
    must_hold: frozenset
    must_fail: frozenset
    trials: int = 1000
    seed: int = 0
    point_counts: tuple[int, int] = (3, 3)
    method: str = "euclidean"
    N_range: tuple[int, ...] = (1, 2, 3, 4, 5)
    H: int | None = None

    def __post_init__(self):
        hold = frozenset(Family(f) for f in self.must_hold)
        fail = frozenset(Family(f) for f in self.must_fail)
        if hold & fail:
            raise InvalidSpec(f"families both required and forbidden: {sorted(f.value for f in hold & fail)}")
        if not hold and not fail:
            raise InvalidSpec("query constrains no family")
        if self.trials < 1:
            raise InvalidSpec("trials must be >= 1")
        lo, hi = self.point_counts
        if not 2 <= lo <= hi <= 64:
            raise InvalidSpec(f"point_counts must satisfy 2 <= lo <= hi <= 64, got {self.point_counts}")
        if self.method not in METHODS + ("discrete",):
            raise InvalidSpec(f"unknown method {self.method!r}")
        object.__setattr__(self, "must_hold", hold)
        object.__setattr__(self, "must_fail", fail)

    @property
    def families(self) -> frozenset:
        return self.must_hold | self.must_fail

    def matches(self, c: Classification) -> bool:
        return all(c[f].member for f in self.must_hold) and not any(c[f].member for f in self.must_fail)

    def to_json(self) -> dict:
        return {
            "must_hold": sorted(f.value for f in self.must_hold),
            "must_fail": sorted(f.value for f in self.must_fail),
            "trials": self.trials,
            "seed": self.seed,
            "point_counts": list(self.point_counts),
            "method": self.method,
            "N_range": list(self.N_range),
            "H": self.H,
        }


@dataclass(frozen=True)
class SeparationWitness:
    seed: int
    trial: int
    space: FiniteSpace
    map: TableMap
    classification: Classification

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "trial": self.trial,
            "matrix": self.space.matrix.tolist(),
            "table": list(self.map.table),
            "classification": self.classification.to_json(),
        }


@dataclass(frozen=True)
class SearchResult:
    query: SeparationQuery
    witnesses: list = field(default_factory=list)

    @property
    def message(self) -> str:
        if not self.witnesses:
            return f"no witness found in {self.query.trials} trials"
        return f"{len(self.witnesses)} witnesses in {self.query.trials} trials"

    def to_json(self) -> dict:
        return {
            "query": self.query.to_json(),
            "message": self.message,
            "witnesses": [w.to_json() for w in self.witnesses],
        }


def trial_instance(seed: int, trial: int, point_counts=(3, 3), method="euclidean"):
    """The (space, map) pair generated for one trial; deterministic in (seed, trial)."""
    ss = np.random.SeedSequence([seed, trial])
    rng = np.random.default_rng(ss)
    lo, hi = point_counts
    n = int(rng.integers(lo, hi + 1))
    space_seed, map_seed = (int(s) for s in rng.integers(0, 2**63 - 1, size=2))
    if method == "discrete":
        space = FiniteSpace(1.0 - np.eye(n))
    else:
        space = random_finite_metric(RandomSpaceSpec(n, method, space_seed))
    return space, random_self_map(n, map_seed, space)


def small_image_map(space: FiniteSpace, rng: np.random.Generator, max_image: int = 3) -> TableMap:
    """Random map whose image has 2..max_image points (1 for a one-point space)."""
    n = space.n
    m = int(rng.integers(min(2, n), min(n, max_image) + 1))
    image = rng.choice(n, m, replace=False)
    return TableMap(space, tuple(int(v) for v in image[rng.integers(0, m, n)]))


def contractive_instances(count: int, seed: int = 0, max_points: int = 12, k_max: float = 0.95,
                          method: str = "euclidean", max_draws: int = 10**6):
    """Seeded random (space, map, k_hat) with Banach constant ``0 < k_hat < k_max``.

    Uniform random maps are almost never contractive, so maps with a small
    image are drawn and then filtered on the measured constant.
    """
    from palab.conditions import tightest_constant

    found = []
    for draw in range(max_draws):
        if len(found) == count:
            break
        rng = np.random.default_rng([seed, draw])
        n = int(rng.integers(2, max_points + 1))
        space = random_finite_metric(RandomSpaceSpec(n, method, int(rng.integers(2**62))))
        T = small_image_map(space, rng)
        M = space.matrix
        iu = np.triu_indices(n, 1)
        t = np.asarray(T.table)
        if not 0 < (M[t][:, t][iu] / M[iu]).max() < k_max:
            continue
        k = tightest_constant(Family.BANACH, space, T, sample_pairs(space)).estimate
        found.append((space, T, k))
    return found


def search_separation(query: SeparationQuery) -> SearchResult:
    witnesses = []
    for i in range(query.trials):
        space, T = trial_instance(query.seed, i, query.point_counts, query.method)
        c = classify(space, T, query.N_range, query.H, families=query.families)
        if query.matches(c):
            witnesses.append(SeparationWitness(query.seed, i, space, T, c))
    return SearchResult(query, witnesses)


def reload_witness(data: dict) -> tuple[FiniteSpace, TableMap]:
    space = FiniteSpace(np.array(data["matrix"], dtype=float))
    return space, TableMap(space, tuple(data["table"]))
