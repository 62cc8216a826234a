"""Metric spaces used by the checkers.

Three concrete spaces are provided:

* :class:`FiniteSpace` -- points ``0..n-1`` with an explicit distance matrix.
* :class:`IntervalSpace` -- a closed real interval with ``|x - y|``; a uniform
  grid is used whenever points have to be enumerated.
* :class:`HarmonicSpace` -- ``{1, 2, ..., M} U {INF}`` with ``|1/m - 1/n|``
  and ``1/INF = 0``.

Besides the scalar ``distance`` every space exposes an array encoding
(``code``/``point``/``pairwise``) so orbit tables over many pairs can be
built with numpy instead of Python loops.  The encodings are chosen so that
``pairwise`` reproduces ``distance`` bit for bit.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from palab.errors import DomainMismatch, InvalidSpec, OutOfRange

EPS = 1e-12
DEFAULT_GRID = 1001
DEFAULT_TRUNCATION = 10_000
EXHAUSTIVE_LIMIT = 64


def tol(*values: float) -> float:
    """Absolute slack for a ``<=`` test on reals of the given magnitudes."""
    return EPS * max(1.0, *(abs(v) for v in values))


def leq(a: float, b: float) -> bool:
    return a <= b + tol(a, b)


class _Infinity:
    """Sentinel for the point at infinity of :class:`HarmonicSpace`."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()

Point = Any  # int | float | _Infinity


def point_key(p: Point) -> float:
    """Total order used for lexicographic witness selection."""
    if p is INF:
        return math.inf
    return p


def point_to_json(p: Point):
    if p is INF:
        return "inf"
    if isinstance(p, (np.integer,)):
        return int(p)
    if isinstance(p, (np.floating,)):
        return float(p)
    return p


def _is_int(p) -> bool:
    if type(p) is int:
        return True
    return isinstance(p, (numbers.Integral, np.integer)) and not isinstance(p, (bool, np.bool_))


def _is_real(p) -> bool:
    return isinstance(p, (numbers.Real, np.floating, np.integer)) and not isinstance(
        p, (bool, np.bool_)
    )


class MetricSpace:
    kind: str = ""

    def validate(self, p: Point) -> Point:
        raise NotImplementedError

    def distance(self, x: Point, y: Point) -> float:
        raise NotImplementedError

    def code(self, p: Point):
        raise NotImplementedError

    def point(self, c) -> Point:
        raise NotImplementedError

    def codes(self, points: Sequence[Point]) -> np.ndarray:
        return np.array([self.code(p) for p in points], dtype=self.code_dtype)

    def pairwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def enumerate_points(self, limit: int) -> list[Point]:
        raise NotImplementedError

    @property
    def is_finite(self) -> bool:
        return False

    def params(self) -> dict:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind, "params": self.params()}


@dataclass(frozen=True, eq=False)
class FiniteSpace(MetricSpace):
    matrix: np.ndarray
    kind = "finite"
    code_dtype = np.intp

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidSpec(f"distance matrix must be square and nonempty, got {m.shape}")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise InvalidSpec("distances must be finite and nonnegative")
        if np.any(np.diag(m) != 0):
            raise InvalidSpec("diagonal of a distance matrix must be zero")
        if not np.array_equal(m, m.T):
            raise InvalidSpec("distance matrix must be symmetric")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_finite(self) -> bool:
        return True

    def validate(self, p):
        if not _is_int(p):
            raise DomainMismatch(f"finite space expects an integer index, got {p!r}")
        if not 0 <= p < self.n:
            raise OutOfRange(f"index {p} outside 0..{self.n - 1}")
        return int(p)

    def distance(self, x, y) -> float:
        return float(self.matrix[self.validate(x), self.validate(y)])

    def code(self, p):
        return self.validate(p)

    def point(self, c):
        return int(c)

    def pairwise(self, a, b):
        return self.matrix[a, b]

    def enumerate_points(self, limit: int) -> list[int]:
        return list(range(self.n))

    def params(self) -> dict:
        return {"points": self.n, "matrix": self.matrix.tolist()}


def discrete_space(n: int) -> FiniteSpace:
    """The discrete metric (0 on the diagonal, 1 elsewhere) on ``n`` points."""
    return FiniteSpace(1.0 - np.eye(n))


def load_finite_space(path: str | Path) -> FiniteSpace:
    """Read a header-free, row-major, symmetric CSV distance matrix."""
    m = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    if m.shape[0] != m.shape[1]:
        raise InvalidSpec(f"{path}: matrix is {m.shape[0]}x{m.shape[1]}")
    gap = np.abs(m - m.T)
    if np.any(gap > EPS * np.maximum(1.0, np.abs(m))):
        i, j = np.argwhere(gap > EPS * np.maximum(1.0, np.abs(m)))[0]
        raise InvalidSpec(f"{path}: asymmetric entry ({i},{j}): {m[i, j]} vs {m[j, i]}")
    return FiniteSpace((m + m.T) / 2)


@dataclass(frozen=True)
class IntervalSpace(MetricSpace):
    lo: float = 0.0
    hi: float = 1.0
    resolution: int = DEFAULT_GRID
    kind = "interval"
    code_dtype = np.float64

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidSpec(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if self.resolution < 2:
            raise InvalidSpec("grid resolution must be at least 2")

    def validate(self, p):
        if not _is_real(p):
            raise DomainMismatch(f"interval space expects a real number, got {p!r}")
        p = float(p)
        if not self.lo <= p <= self.hi:
            raise OutOfRange(f"{p} outside [{self.lo}, {self.hi}]")
        return p

    def distance(self, x, y) -> float:
        return abs(self.validate(x) - self.validate(y))

    def code(self, p):
        return self.validate(p)

    def point(self, c):
        return float(c)

    def pairwise(self, a, b):
        return np.abs(a - b)

    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.resolution)

    def enumerate_points(self, limit: int) -> list[float]:
        return [float(v) for v in self.grid()[:limit]]

    def params(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "resolution": self.resolution}


def _recip(codes: np.ndarray) -> np.ndarray:
    codes = np.asarray(codes)
    out = np.zeros(codes.shape, dtype=float)
    np.divide(1.0, codes, out=out, where=codes != 0)
    return out


@dataclass(frozen=True)
class HarmonicSpace(MetricSpace):
    """Positive integers up to ``truncation`` plus ``INF``; code 0 stands for ``INF``."""

    truncation: int = DEFAULT_TRUNCATION
    kind = "harmonic"
    code_dtype = np.int64

    def __post_init__(self):
        if self.truncation < 1:
            raise InvalidSpec("truncation must be >= 1")

    def validate(self, p):
        if p is INF:
            return INF
        if not _is_int(p):
            raise DomainMismatch(f"harmonic space expects a positive integer or INF, got {p!r}")
        if not 1 <= p <= self.truncation:
            raise OutOfRange(f"{p} outside 1..{self.truncation}")
        return int(p)

    def distance(self, x, y) -> float:
        x, y = self.validate(x), self.validate(y)
        rx = 0.0 if x is INF else 1.0 / x
        ry = 0.0 if y is INF else 1.0 / y
        return abs(rx - ry)

    def code(self, p):
        p = self.validate(p)
        return 0 if p is INF else p

    def point(self, c):
        return INF if c == 0 else int(c)

    def pairwise(self, a, b):
        return np.abs(_recip(a) - _recip(b))

    def enumerate_points(self, limit: int) -> list:
        return list(range(1, min(self.truncation, limit - 1) + 1)) + [INF]

    def params(self) -> dict:
        return {"truncation": self.truncation}


def distance(space: MetricSpace, x: Point, y: Point) -> float:
    return space.distance(x, y)


def enumerate_points(space: MetricSpace, limit: int) -> list:
    if limit < 1:
        raise InvalidSpec("limit must be >= 1")
    return space.enumerate_points(limit)


@dataclass(frozen=True)
class AxiomReport:
    passed: bool
    triples_checked: int
    exhaustive: bool
    axiom: str | None = None
    witness: tuple | None = None
    details: dict = field(default_factory=dict)


def verify_metric_axioms(
    space: MetricSpace,
    triple_sample_size: int = 10_000,
    seed: int = 0,
    *,
    limit: int = 100_000,
) -> AxiomReport:
    """Check the metric axioms on all triples (<= 64 points) or a seeded sample.

    The first violating triple, in enumeration order for exhaustive runs and
    in draw order otherwise, is reported. Triangle: ``d(x,z) <= d(x,y) + d(y,z)``.
    """
    points = space.enumerate_points(limit)
    codes = space.codes(points)
    n = len(points)
    exhaustive = n <= EXHAUSTIVE_LIMIT
    if exhaustive:
        ix, iy, iz = (a.ravel() for a in np.indices((n, n, n)))
    else:
        rng = np.random.default_rng(seed)
        ix, iy, iz = rng.integers(0, n, size=(3, triple_sample_size))
    x, y, z = codes[ix], codes[iy], codes[iz]
    dxy = space.pairwise(x, y)
    dyx = space.pairwise(y, x)
    dxz = space.pairwise(x, z)
    dyz = space.pairwise(y, z)
    dxx = space.pairwise(x, x)

    checks = [
        ("identity", dxx != 0),
        ("nonnegativity", dxy < 0),
        ("symmetry", dxy != dyx),
        ("indiscernibles", (dxy == 0) != (ix == iy)),
        ("triangle", dxz > dxy + dyz + EPS * np.maximum(1.0, dxz)),
    ]
    first = None
    for name, bad in checks:
        hits = np.flatnonzero(bad)
        if hits.size and (first is None or hits[0] < first[1]):
            first = (name, int(hits[0]))
    if first is None:
        return AxiomReport(True, len(ix), exhaustive)
    name, i = first
    witness = (points[ix[i]], points[iy[i]], points[iz[i]])
    return AxiomReport(
        False,
        len(ix),
        exhaustive,
        axiom=name,
        witness=witness,
        details={"d_xy": float(dxy[i]), "d_yz": float(dyz[i]), "d_xz": float(dxz[i])},
    )
