"""Contraction conditions: pointwise checks, the PA orbit-sum check, and
tightest-constant estimation over pair samples.

Pointwise families compare ``d(Tx, Ty)`` with a kernel built from the pair:

=========== ============================================== =========
family      kernel                                         bound
=========== ============================================== =========
banach      d(x,y)                                         k < 1
kannan      d(x,Tx) + d(y,Ty)                              k < 1/2
chatterjea  d(x,Ty) + d(y,Tx)                              k < 1/2
ciric       max(d(x,y), d(x,Tx), d(y,Ty), (d(x,Ty)+d(y,Tx))/2)  k < 1
=========== ============================================== =========

The F-contraction family checks ``tau + F(d(Tx,Ty)) <= F(d(x,y))`` on pairs
with ``d(Tx,Ty) > 0``.  The PA family checks, for every ``n`` in ``[N, H]``,
``S1[n] <= alpha * S[n]`` where ``S[n] = sum_{k<n} D[k]``,
``S1[n] = sum_{k<n} D[k+1]`` and ``D[k] = d(T^k x, T^k y)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from palab.errors import AllDegenerate, EmptySample, InvalidSpec, WrongFamily
from palab.maps import OrbitFlags, SelfMap, _check_space, pair_tables
from palab.metric import (
    EPS,
    FiniteSpace,
    HarmonicSpace,
    IntervalSpace,
    MetricSpace,
    Point,
    point_key,
    point_to_json,
)


class Family(str, enum.Enum):
    BANACH = "banach"
    KANNAN = "kannan"
    CHATTERJEA = "chatterjea"
    CIRIC = "ciric"
    F = "f"
    PA = "pa"

    @property
    def bound(self) -> float:
        """Supremum of admissible constants (for F: infimum of admissible tau)."""
        return _BOUNDS[self]

    @property
    def pointwise(self) -> bool:
        return self is not Family.PA


_BOUNDS = {
    Family.BANACH: 1.0,
    Family.KANNAN: 0.5,
    Family.CHATTERJEA: 0.5,
    Family.CIRIC: 1.0,
    Family.F: 0.0,
    Family.PA: 1.0,
}

RATIO_FAMILIES = (Family.BANACH, Family.KANNAN, Family.CHATTERJEA, Family.CIRIC)


@dataclass(frozen=True)
class FFunction:
    name: str
    func: Callable[[np.ndarray], np.ndarray]
    # an exponent k in (0,1) with t^k F(t) -> 0 as t -> 0+
    f3_exponent: float


def _log_plus(t):
    return np.log(t) + t


def _neg_inv_sqrt(t):
    return -1.0 / np.sqrt(t)


F_FUNCTIONS = {
    "log": FFunction("log", np.log, 0.5),
    "log-plus": FFunction("log-plus", _log_plus, 0.5),
    "neg-inv-sqrt": FFunction("neg-inv-sqrt", _neg_inv_sqrt, 0.75),
}


def check_f_admissible(f: FFunction) -> dict[str, bool]:
    """Numerical spot check of the three admissibility conditions on ``F``."""
    t = np.logspace(-15, 3, 400)
    v = f.func(t)
    small = 10.0 ** -np.arange(1, 16)
    fs = f.func(small)
    decay = small**f.f3_exponent * fs
    return {
        "strictly_increasing": bool(np.all(np.diff(v) > 0)),
        "to_minus_infinity": bool(np.all(np.diff(fs) < 0) and fs[-1] < -30),
        "power_decay": bool(abs(decay[-1]) < 1e-3 and abs(decay[-1]) < abs(decay[0])),
    }


@dataclass(frozen=True)
class ConditionSpec:
    family: Family
    k: float | None = None
    alpha: float | None = None
    N: int | None = None
    H: int | None = None
    f_id: str | None = None
    tau: float | None = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if fam in (Family.BANACH, Family.CIRIC):
            _open_range("k", self.k, 0.0, 1.0)
        elif fam in (Family.KANNAN, Family.CHATTERJEA):
            _open_range("k", self.k, 0.0, 0.5)
        elif fam is Family.F:
            if self.f_id not in F_FUNCTIONS:
                raise InvalidSpec(f"unknown F function {self.f_id!r}; choose from {sorted(F_FUNCTIONS)}")
            if self.tau is None or not self.tau > 0:
                raise InvalidSpec(f"tau must be > 0, got {self.tau}")
        else:
            _open_range("alpha", self.alpha, 0.0, 1.0)
            if self.N is None or self.N < 1:
                raise InvalidSpec(f"N must be a positive integer, got {self.N}")
            if self.H is None or self.H < self.N:
                raise InvalidSpec(f"horizon H={self.H} must be >= N={self.N}")

    @classmethod
    def pa(cls, alpha: float, N: int, H: int) -> "ConditionSpec":
        return cls(Family.PA, alpha=alpha, N=N, H=H)

    @classmethod
    def f(cls, tau: float, f_id: str = "log") -> "ConditionSpec":
        return cls(Family.F, f_id=f_id, tau=tau)

    def to_json(self) -> dict:
        out = {"family": self.family.value}
        for name in ("k", "alpha", "N", "H", "f_id", "tau"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        return out


def _open_range(name, value, lo, hi):
    if value is None or not lo < value < hi:
        raise InvalidSpec(f"{name} must lie in ({lo}, {hi}), got {value}")


# ----------------------------------------------------------------------------
# pair samples

def _lex_order(pairs: Sequence[tuple]) -> np.ndarray:
    kx = np.array([point_key(p[0]) for p in pairs], dtype=float)
    ky = np.array([point_key(p[1]) for p in pairs], dtype=float)
    return np.lexsort((ky, kx))


def sample_pairs(
    space: MetricSpace,
    *,
    seed: int = 0,
    scheme: str = "default",
    window: tuple[float, float] | None = None,
    limit: int = 1000,
    max_random: int = 200_000,
    full_grid_max: int = 200,
) -> list[tuple]:
    """Unordered pairs ``(x, y)`` with ``x`` before ``y`` in enumeration order.

    ``scheme="default"``: all pairs for finite spaces; all grid pairs for
    grids of at most ``full_grid_max`` points, otherwise ``max_random`` seeded
    random grid pairs plus every adjacent pair; all pairs of ``1..limit`` plus
    ``INF`` for the harmonic space.  ``scheme="adjacent"`` keeps only
    neighbouring points.  ``window`` restricts interval grids to ``[lo, hi]``.
    """
    if isinstance(space, IntervalSpace):
        pts = space.grid()
        if window is not None:
            lo, hi = window
            pts = pts[(pts >= lo - EPS) & (pts <= hi + EPS)]
    elif isinstance(space, HarmonicSpace):
        pts = space.enumerate_points(limit + 1)
    else:
        pts = space.enumerate_points(limit)
    m = len(pts)
    if scheme == "adjacent":
        idx = [(i, i + 1) for i in range(m - 1)]
        return [(_pt(pts[i]), _pt(pts[j])) for i, j in idx]
    if scheme != "default":
        raise InvalidSpec(f"unknown pair scheme {scheme!r}")
    iu, ju = np.triu_indices(m, 1)
    if isinstance(space, IntervalSpace) and m > full_grid_max and len(iu) > max_random:
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(iu), size=max_random, replace=False)
        flat = np.concatenate([iu[pick] * m + ju[pick], np.arange(m - 1) * m + np.arange(1, m)])
        flat = np.unique(flat)
        iu, ju = flat // m, flat % m
    return [(_pt(pts[i]), _pt(pts[j])) for i, j in zip(iu.tolist(), ju.tolist())]


def _pt(p):
    return float(p) if isinstance(p, np.floating) else p


def _prepare(pairs) -> list[tuple]:
    pairs = list(pairs)
    if not pairs:
        raise EmptySample("pair sample is empty")
    order = _lex_order(pairs)
    return [pairs[i] for i in order]


# ----------------------------------------------------------------------------
# pointwise families

@dataclass(frozen=True)
class PointwiseTerms:
    pairs: list[tuple]
    dxy: np.ndarray
    dTT: np.ndarray
    dxTx: np.ndarray
    dyTy: np.ndarray
    dxTy: np.ndarray
    dyTx: np.ndarray
    flags: OrbitFlags


def pointwise_terms(space: MetricSpace, map: SelfMap, pairs: Sequence[tuple]) -> PointwiseTerms:
    _check_space(space, map)
    xs = space.codes([p[0] for p in pairs])
    ys = space.codes([p[1] for p in pairs])
    uniq, inv = np.unique(np.concatenate([xs, ys]), return_inverse=True)
    orb, flags = map.orbit_codes(uniq, 1)
    n = len(pairs)
    img = orb[:, 1][inv]
    tx, ty = img[:n], img[n:]
    d = space.pairwise
    return PointwiseTerms(
        list(pairs),
        d(xs, ys).astype(float),
        d(tx, ty).astype(float),
        d(xs, tx).astype(float),
        d(ys, ty).astype(float),
        d(xs, ty).astype(float),
        d(ys, tx).astype(float),
        flags,
    )


def kernel(family: Family, t: PointwiseTerms) -> np.ndarray:
    if family is Family.BANACH:
        return t.dxy
    if family is Family.KANNAN:
        return t.dxTx + t.dyTy
    if family is Family.CHATTERJEA:
        return t.dxTy + t.dyTx
    if family is Family.CIRIC:
        return np.maximum.reduce([t.dxy, t.dxTx, t.dyTy, (t.dxTy + t.dyTx) / 2])
    raise WrongFamily(f"{family.value} has no ratio kernel")


def _sides(spec: ConditionSpec, t: PointwiseTerms):
    """(lhs, rhs, applicable) arrays for a pointwise spec."""
    if spec.family is Family.PA:
        raise WrongFamily("PA is not a pointwise condition; use check_condition")
    if spec.family is Family.F:
        F = F_FUNCTIONS[spec.f_id].func
        applicable = t.dTT > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            lhs = np.where(applicable, spec.tau + F(np.where(applicable, t.dTT, 1.0)), -np.inf)
            rhs = np.where(t.dxy > 0, F(np.where(t.dxy > 0, t.dxy, 1.0)), -np.inf)
        return lhs, rhs, applicable
    return t.dTT, spec.k * kernel(spec.family, t), np.ones(len(t.dTT), dtype=bool)


class ConditionValue(NamedTuple):
    lhs: float
    rhs: float
    applicable: bool
    kernel: float | None  # the rhs before multiplying by k; None for F

    @property
    def holds(self) -> bool:
        if not self.applicable:
            return True
        return self.lhs <= self.rhs + EPS * max(1.0, abs(self.lhs), abs(self.rhs))


def evaluate_condition(spec: ConditionSpec, space: MetricSpace, map: SelfMap, x: Point, y: Point) -> ConditionValue:
    if spec.family is Family.PA:
        raise WrongFamily("evaluate_condition handles pointwise families only")
    t = pointwise_terms(space, map, [(x, y)])
    lhs, rhs, app = _sides(spec, t)
    ker = None if spec.family is Family.F else float(kernel(spec.family, t)[0])
    return ConditionValue(float(lhs[0]), float(rhs[0]), bool(app[0]), ker)


# ----------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class Witness:
    pair: tuple
    n: int | None
    lhs: float
    rhs: float
    kernel: float | None = None

    def to_json(self) -> dict:
        return {
            "pair": [point_to_json(p) for p in self.pair],
            "n": self.n,
            "lhs": self.lhs,
            "rhs": self.rhs,
        }


HOLDS = "holds_on_sample"
VIOLATED = "violated"


@dataclass(frozen=True)
class CheckReport:
    spec: ConditionSpec
    verdict: str
    witness: Witness | None
    pairs_checked: int
    instances_checked: int
    sample: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS


def _violations(lhs, rhs, applicable):
    slack = EPS * np.maximum(1.0, np.maximum(np.abs(np.nan_to_num(lhs, neginf=0.0)),
                                             np.abs(np.nan_to_num(rhs, neginf=0.0))))
    return applicable & (lhs > rhs + slack)


def pa_sums(D: np.ndarray, H: int) -> tuple[np.ndarray, np.ndarray]:
    """Column ``n-1`` holds ``S[n]`` and ``S1[n]`` for ``n = 1..H``."""
    S = np.cumsum(D[..., :H], axis=-1)
    S1 = np.cumsum(D[..., 1 : H + 1], axis=-1)
    return S, S1


def check_condition(
    spec: ConditionSpec,
    space: MetricSpace,
    map: SelfMap,
    pairs: Sequence[tuple],
    H: int | None = None,
    *,
    sample: dict | None = None,
) -> CheckReport:
    """Check ``spec`` on every pair (and every ``n`` in ``[N, H]`` for PA).

    The witness, if any, is the lexicographically smallest violating
    ``(x, y, n)``.
    """
    pairs = _prepare(pairs)
    sample = dict(sample or {"pairs": len(pairs)})
    if spec.family is Family.PA:
        if H is not None and H != spec.H:
            raise InvalidSpec(f"horizon {H} differs from spec.H={spec.H}")
        tables = pair_tables(space, map, pairs, spec.H)
        S, S1 = pa_sums(tables.D, spec.H)
        lo = spec.N - 1
        lhs = S1[:, lo:]
        rhs = spec.alpha * S[:, lo:]
        bad = _violations(lhs, rhs, np.ones_like(lhs, dtype=bool))
        witness = None
        if bad.any():
            i, j = np.unravel_index(np.argmax(bad), bad.shape)
            witness = Witness(pairs[i], int(j + spec.N), float(lhs[i, j]), float(rhs[i, j]),
                              float(S[i, j + lo]))
        return CheckReport(
            spec, VIOLATED if witness else HOLDS, witness, len(pairs), int(lhs.size),
            sample, tables.flags.notes(),
        )
    t = pointwise_terms(space, map, pairs)
    lhs, rhs, app = _sides(spec, t)
    bad = _violations(lhs, rhs, app)
    witness = None
    if bad.any():
        i = int(np.argmax(bad))
        ker = None if spec.family is Family.F else float(kernel(spec.family, t)[i])
        witness = Witness(pairs[i], None, float(lhs[i]), float(rhs[i]), ker)
    notes = t.flags.notes()
    skipped = int((~app).sum())
    if skipped:
        notes.append(f"{skipped} pairs with d(Tx,Ty) = 0 are vacuously satisfied")
    return CheckReport(spec, VIOLATED if witness else HOLDS, witness, len(pairs), len(pairs),
                       sample, notes)


# ----------------------------------------------------------------------------
# tightest constants

@dataclass(frozen=True)
class TightestResult:
    family: Family
    estimate: float
    witness: Witness | None
    defined_count: int
    skipped_count: int
    N: int | None = None
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "family": self.family.value,
            "estimate": _json_float(self.estimate),
            "witness": self.witness.to_json() if self.witness else None,
            "defined_count": self.defined_count,
            "skipped_count": self.skipped_count,
            "N": self.N,
        }


def _json_float(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _ratios(num: np.ndarray, den: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``num/den`` with 0/0 undefined (NaN) and positive/0 = +inf."""
    defined = (den > 0) | (num > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
    return np.where(defined, r, np.nan), defined


def tightest_constant(
    family: Family | str,
    space: MetricSpace,
    map: SelfMap,
    pairs: Sequence[tuple],
    N: int = 1,
    H: int | None = None,
    *,
    f_id: str = "log",
) -> TightestResult:
    """Sample supremum of the family's ratio (least admissible constant).

    For ``Family.F`` the estimate is the infimum over pairs with
    ``d(Tx,Ty) > 0`` of ``F(d(x,y)) - F(d(Tx,Ty))``, i.e. the largest
    admissible ``tau``.  Instances with zero numerator and denominator are
    skipped and counted; a positive numerator over a zero denominator
    counts as ``+inf``.
    """
    family = Family(family)
    pairs = _prepare(pairs)
    if family is Family.PA:
        if H is None or H < N or N < 1:
            raise InvalidSpec(f"PA needs 1 <= N <= H, got N={N}, H={H}")
        tables = pair_tables(space, map, pairs, H)
        S, S1 = pa_sums(tables.D, H)
        return pa_tightest_from_sums(pairs, S, S1, N, tables.flags.notes())
    t = pointwise_terms(space, map, pairs)
    return pointwise_tightest(family, t, f_id)


def pa_tightest_from_sums(pairs, S, S1, N, notes=()) -> TightestResult:
    r, defined = _ratios(S1[:, N - 1 :], S[:, N - 1 :])
    if not defined.any():
        raise AllDegenerate("every (pair, n) instance has S[n] = 0")
    i, j = np.unravel_index(np.nanargmax(r), r.shape)
    w = Witness(pairs[i], int(j + N), float(S1[i, j + N - 1]), float(S[i, j + N - 1]))
    return TightestResult(Family.PA, float(r[i, j]), w, int(defined.sum()),
                          int((~defined).sum()), N, list(notes))


def pointwise_tightest(family: Family, t: PointwiseTerms, f_id: str = "log") -> TightestResult:
    pairs = t.pairs
    if family is Family.F:
        F = F_FUNCTIONS[f_id].func
        ok = t.dTT > 0
        if not ok.any():
            raise AllDegenerate("d(Tx,Ty) = 0 for every pair")
        with np.errstate(divide="ignore"):
            gap = np.where(ok, F(np.where(ok, t.dxy, 1.0)) - F(np.where(ok, t.dTT, 1.0)), np.inf)
        i = int(np.argmin(gap))
        w = Witness(pairs[i], None, float(t.dTT[i]), float(t.dxy[i]))
        return TightestResult(family, float(gap[i]), w, int(ok.sum()), int((~ok).sum()),
                              notes=t.flags.notes())
    den = kernel(family, t)
    r, defined = _ratios(t.dTT, den)
    if not defined.any():
        raise AllDegenerate(f"every pair has a zero {family.value} kernel and d(Tx,Ty) = 0")
    i = int(np.nanargmax(r))
    w = Witness(pairs[i], None, float(t.dTT[i]), float(den[i]))
    return TightestResult(family, float(r[i]), w, int(defined.sum()), int((~defined).sum()),
                          notes=t.flags.notes())


# ----------------------------------------------------------------------------
# ratio profile

@dataclass(frozen=True)
class PASums:
    """Orbit sums of one pair.  Index ``n-1`` holds the value for ``n``."""

    pair: tuple
    D: np.ndarray
    S: np.ndarray
    S1: np.ndarray
    rho: np.ndarray  # NaN where S[n] == 0
    flags: OrbitFlags = OrbitFlags()

    @property
    def n(self) -> np.ndarray:
        return np.arange(1, len(self.S) + 1)

    def at(self, n: int) -> tuple[float, float, float | None]:
        r = self.rho[n - 1]
        return float(self.S[n - 1]), float(self.S1[n - 1]), None if math.isnan(r) else float(r)

    def rows(self):
        for n in range(1, len(self.S) + 1):
            yield (n, *self.at(n))


def pa_ratio_profile(space: MetricSpace, map: SelfMap, x: Point, y: Point, H: int) -> PASums:
    if H < 1:
        raise InvalidSpec("horizon must be >= 1")
    tables = pair_tables(space, map, [(x, y)], H)
    D = tables.D[0]
    S, S1 = pa_sums(D, H)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(S > 0, S1 / np.where(S > 0, S, 1.0), np.nan)
    return PASums((x, y), D, S, S1, rho, tables.flags)
