"""Picard iteration with the step-distance / partial-sum bookkeeping used in
the summability argument, plus a fixed-point scanner."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from palab.errors import InsufficientTrace, InvalidSpec
from palab.maps import SelfMap, _check_space
from palab.metric import EPS, MetricSpace, Point, point_to_json

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10**6
CONVERGENCE_RUN = 3


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter_reached"
    CYCLED = "cycled"


@dataclass(frozen=True)
class PicardTrace:
    x0: Point
    iterates: list
    a: np.ndarray  # a[k] = d(x_k, x_{k+1})
    S: np.ndarray  # S[n-1] = a[0] + ... + a[n-1]
    status: Status
    limit_candidate: Point | None = None
    residual: float | None = None
    exact_fixed_point: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.a)

    def S_n(self, n: int) -> float:
        return 0.0 if n == 0 else float(self.S[n - 1])

    def to_json(self) -> dict:
        return {
            "x0": point_to_json(self.x0),
            "status": self.status.value,
            "steps": self.steps,
            "limit_candidate": point_to_json(self.limit_candidate),
            "residual": self.residual,
            "iterates": [point_to_json(p) for p in self.iterates],
            "a": self.a.tolist(),
            "S": self.S.tolist(),
            "notes": list(self.notes),
        }


def run_picard(
    space: MetricSpace,
    map: SelfMap,
    x0: Point,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> PicardTrace:
    """Iterate ``x_{k+1} = T x_k`` from ``x0``.

    Stops when a step is exactly zero (``x_k`` is a fixed point), after
    three consecutive steps ``<= tol``, on revisiting a point of a finite
    space, or after ``max_iter`` steps.
    """
    if not tol > 0:
        raise InvalidSpec("tol must be > 0")
    _check_space(space, map)
    x = space.validate(x0)
    iterates = [x]
    a = []
    seen = {x} if space.is_finite else None
    run = 0
    status, limit, exact = Status.MAX_ITER, None, False
    notes = []
    for _ in range(max_iter):
        y = map.apply(x)
        step = space.distance(x, y)
        iterates.append(y)
        a.append(step)
        if step == 0.0:
            status, limit, exact = Status.CONVERGED, x, True
            break
        run = run + 1 if step <= tol else 0
        if run >= CONVERGENCE_RUN:
            status, limit = Status.CONVERGED, y
            break
        if seen is not None:
            if y in seen:
                status = Status.CYCLED
                break
            seen.add(y)
        x = y
    if map.saturates(iterates[-1]):
        notes.append("orbit reached the truncation bound")
    residual = None
    if limit is not None:
        residual = space.distance(limit, map.apply(limit))
    a_arr = np.array(a, dtype=float)
    return PicardTrace(x0, iterates, a_arr, np.cumsum(a_arr), status, limit, residual, exact, notes)


@dataclass(frozen=True)
class BoundRow:
    n: int
    S_n: float
    a_n: float
    averaged_ok: bool  # (1 - alpha) S_n <= a_0 - a_n
    bounded_ok: bool  # S_n <= C


@dataclass(frozen=True)
class BoundReport:
    alpha: float
    N: int
    a0: float
    C: float
    rows: list[BoundRow]
    sup_S: float

    @property
    def passed(self) -> bool:
        return all(r.averaged_ok and r.bounded_ok for r in self.rows) and self.sup_S <= self.C + EPS * max(1.0, self.C)

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "N": self.N,
            "a0": self.a0,
            "C": self.C,
            "sup_S": self.sup_S,
            "passed": self.passed,
            "rows": [r.__dict__ for r in self.rows],
        }


def check_summability_bound(trace: PicardTrace, alpha: float, N: int) -> BoundReport:
    """Evaluate ``(1-alpha) S_n <= a_0 - a_n`` and ``S_n <= C`` along a trace.

    ``C = max(S_1, ..., S_{N-1}, a_0 / (1 - alpha))``.  A trace that stopped
    on an exact fixed point is extended with zero steps, so it is never too
    short.  Both inequalities must hold when the map is PA with
    ``(alpha, N)``; failing them refutes that parameter choice.
    """
    if not 0 < alpha < 1:
        raise InvalidSpec(f"alpha must lie in (0, 1), got {alpha}")
    if N < 1:
        raise InvalidSpec(f"N must be >= 1, got {N}")
    a = trace.a
    if trace.exact_fixed_point and len(a) < N + 1:
        a = np.concatenate([a, np.zeros(N + 1 - len(a))])
    if len(a) < N + 1:
        raise InsufficientTrace(f"need at least {N + 1} recorded steps, trace has {len(a)}")
    S = np.cumsum(a)
    a0 = float(a[0])
    C = max([float(S[n - 1]) for n in range(1, N)] + [a0 / (1 - alpha)])
    rows = []
    for n in range(N, len(a)):
        s, an = float(S[n - 1]), float(a[n])
        lhs, rhs = (1 - alpha) * s, a0 - an
        rows.append(BoundRow(n, s, an, lhs <= rhs + EPS * max(1.0, abs(rhs)), s <= C + EPS * max(1.0, C)))
    return BoundReport(alpha, N, a0, C, rows, float(S[-1]))


def find_fixed_points(space: MetricSpace, map: SelfMap, limit: int = 10_000, tol: float = DEFAULT_TOL) -> list:
    """Enumerated points with ``d(x, Tx) <= tol``, in enumeration order.

    Points where a truncated map saturates are skipped: they are fixed only
    because of the truncation.
    """
    _check_space(space, map)
    points = space.enumerate_points(limit)
    codes = space.codes(points)
    orb, _ = map.orbit_codes(codes, 1)
    d = space.pairwise(orb[:, 0], orb[:, 1])
    return [p for p, dist in zip(points, d) if dist <= tol and not map.saturates(p)]
