"""Self-maps, their iterates, and orbit-pair distance tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from palab.errors import DomainMismatch, InvalidSpec
from palab.metric import (
    INF,
    FiniteSpace,
    HarmonicSpace,
    IntervalSpace,
    MetricSpace,
    Point,
)

TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class OrbitFlags:
    underflow: bool = False
    saturated: bool = False

    def __or__(self, other: "OrbitFlags") -> "OrbitFlags":
        return OrbitFlags(self.underflow or other.underflow, self.saturated or other.saturated)

    def notes(self) -> list[str]:
        out = []
        if self.underflow:
            out.append("underflow: iterates below the smallest normal double were flushed to 0")
        if self.saturated:
            out.append("saturation: successor orbit clipped at the truncation bound")
        return out


class SelfMap:
    """A map ``T: X -> X`` bound to the space it acts on."""

    space: MetricSpace
    kind: str = ""
    has_closed_iterate: bool = False

    def _apply(self, x):
        raise NotImplementedError

    def apply(self, x: Point) -> Point:
        return self._apply(self.space.validate(x))

    def iterate(self, x: Point, k: int) -> Point:
        if k < 0:
            raise InvalidSpec("iterate count must be >= 0")
        x = self.space.validate(x)
        for _ in range(k):
            x = self._apply(x)
        return x

    def orbit_codes(self, codes: np.ndarray, horizon: int) -> tuple[np.ndarray, OrbitFlags]:
        """Encoded orbits ``T^k x`` for ``k = 0..horizon``; one row per start code."""
        codes = np.asarray(codes)
        out = np.empty((codes.size, horizon + 1), dtype=codes.dtype)
        for i, c in enumerate(codes):
            x = self.space.point(c)
            for k in range(horizon + 1):
                out[i, k] = self.space.code(x)
                if k < horizon:
                    x = self._apply(x)
        return out, OrbitFlags()

    def saturates(self, x: Point) -> bool:
        return False

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"kind": self.kind, "params": self.params()}


@dataclass(frozen=True, eq=False)
class TableMap(SelfMap):
    space: FiniteSpace
    table: tuple[int, ...]
    kind = "table"

    def __post_init__(self):
        if not isinstance(self.space, FiniteSpace):
            raise DomainMismatch("a table map needs a finite space")
        table = tuple(int(t) for t in self.table)
        if len(table) != self.space.n:
            raise InvalidSpec(f"table has {len(table)} entries for {self.space.n} points")
        if any(not 0 <= t < self.space.n for t in table):
            raise InvalidSpec(f"table entries must lie in 0..{self.space.n - 1}: {table}")
        object.__setattr__(self, "table", table)
        arr = np.array(table, dtype=np.intp)
        arr.setflags(write=False)
        object.__setattr__(self, "_arr", arr)

    def _apply(self, x):
        return self.table[x]

    def orbit_codes(self, codes, horizon):
        codes = np.asarray(codes, dtype=np.intp)
        out = np.empty((codes.size, horizon + 1), dtype=np.intp)
        out[:, 0] = codes
        for k in range(horizon):
            out[:, k + 1] = self._arr[out[:, k]]
        return out, OrbitFlags()

    def params(self) -> dict:
        return {"table": list(self.table)}


def identity_map(space: FiniteSpace) -> TableMap:
    return TableMap(space, tuple(range(space.n)))


def constant_map(space: FiniteSpace, value: int = 0) -> TableMap:
    return TableMap(space, (value,) * space.n)


def load_table_map(path: str | Path, space: FiniteSpace) -> TableMap:
    """Single-column CSV: row ``i`` holds the image index of point ``i``."""
    raw = np.loadtxt(path, delimiter=",", ndmin=1)
    if raw.ndim != 1 or np.any(raw != np.round(raw)):
        raise InvalidSpec(f"{path}: expected one integer column")
    return TableMap(space, tuple(int(v) for v in raw))


def _flush(values: np.ndarray) -> tuple[np.ndarray, bool]:
    small = (values != 0) & (np.abs(values) < TINY)
    if small.any():
        values = np.where(small, 0.0, values)
    return values, bool(small.any())


@dataclass(frozen=True)
class SquareHalfMap(SelfMap):
    """``x -> x**2 / 2`` on an interval ``[0, b]`` with ``b <= 2``."""

    space: IntervalSpace = field(default_factory=IntervalSpace)
    kind = "square-half"
    has_closed_iterate = True

    def __post_init__(self):
        if not isinstance(self.space, IntervalSpace):
            raise DomainMismatch("square-half map needs an interval space")
        if self.space.lo != 0.0 or self.space.hi > 2.0:
            raise InvalidSpec("square-half maps [0, b] into itself only for b <= 2")

    def _apply(self, x):
        v = x * x / 2
        return 0.0 if v < TINY else v

    def closed_iterate(self, x: float, k: int) -> float:
        # x^(2^k) / 2^(2^k - 1) == 2 * (x/2)^(2^k); the second form cannot overflow
        return float(self.orbit_codes(np.array([x]), k)[0][0, k])

    def iterate(self, x, k):
        if k < 0:
            raise InvalidSpec("iterate count must be >= 0")
        return self.closed_iterate(self.space.validate(x), k)

    def orbit_codes(self, codes, horizon):
        codes = np.asarray(codes, dtype=float)
        with np.errstate(over="ignore", under="ignore"):
            powers = np.exp2(np.arange(horizon + 1, dtype=float))
            out = 2.0 * np.power(codes[:, None] / 2.0, powers[None, :])
        out, flushed = _flush(out)
        collapsed = bool(np.any((out == 0) & (codes[:, None] != 0)))
        return out, OrbitFlags(underflow=flushed or collapsed)


@dataclass(frozen=True)
class SuccessorMap(SelfMap):
    """``n -> n + 1`` and ``INF -> INF``, saturating at the truncation bound."""

    space: HarmonicSpace = field(default_factory=HarmonicSpace)
    kind = "successor"
    has_closed_iterate = True

    def __post_init__(self):
        if not isinstance(self.space, HarmonicSpace):
            raise DomainMismatch("successor map needs a harmonic space")

    def _apply(self, x):
        if x is INF:
            return INF
        return min(x + 1, self.space.truncation)

    def iterate(self, x, k):
        if k < 0:
            raise InvalidSpec("iterate count must be >= 0")
        x = self.space.validate(x)
        if x is INF:
            return INF
        return min(x + k, self.space.truncation)

    def saturates(self, x) -> bool:
        return x is not INF and x >= self.space.truncation

    def orbit_codes(self, codes, horizon):
        codes = np.asarray(codes, dtype=np.int64)
        out = codes[:, None] + np.arange(horizon + 1, dtype=np.int64)[None, :]
        out[codes == 0] = 0
        over = out > self.space.truncation
        if over.any():
            out = np.minimum(out, self.space.truncation)
        return out, OrbitFlags(saturated=bool(over.any()))


class CustomMap(SelfMap):
    """Wraps a host-supplied point function; images are validated on use."""

    kind = "custom"

    def __init__(self, space: MetricSpace, func: Callable[[Point], Point], name: str = "custom",
                 check_limit: int = 256):
        self.space = space
        self.func = func
        self.name = name
        for p in space.enumerate_points(check_limit):
            self._apply(p)

    def _apply(self, x):
        try:
            return self.space.validate(self.func(x))
        except DomainMismatch as exc:
            raise DomainMismatch(f"{self.name} maps {x!r} outside its space: {exc}") from exc

    def params(self) -> dict:
        return {"name": self.name}


def apply(map: SelfMap, x: Point) -> Point:
    return map.apply(x)


def iterate(map: SelfMap, x: Point, k: int) -> Point:
    return map.iterate(x, k)


def _check_space(space: MetricSpace, map: SelfMap) -> None:
    if map.space is space:
        return
    if type(map.space) is not type(space) or map.space.describe() != space.describe():
        raise DomainMismatch(f"map acts on {map.space.describe()['kind']} space, not the one given")


@dataclass(frozen=True)
class OrbitPairTable:
    """``D[k] = d(T^k x, T^k y)`` for ``k = 0..horizon``."""

    x: Point
    y: Point
    horizon: int
    D: np.ndarray
    flags: OrbitFlags = OrbitFlags()


def orbit_pair_distances(space: MetricSpace, map: SelfMap, x: Point, y: Point, H: int) -> OrbitPairTable:
    if H < 1:
        raise InvalidSpec("horizon must be >= 1")
    _check_space(space, map)
    codes = space.codes([x, y])
    orbits, flags = map.orbit_codes(codes, H)
    D = space.pairwise(orbits[0], orbits[1]).astype(float)
    D.setflags(write=False)
    return OrbitPairTable(space.point(codes[0]), space.point(codes[1]), H, D, flags)


@dataclass(frozen=True)
class PairTables:
    """Orbit tables for a whole pair sample, stacked row-wise.

    Orbits are computed once per distinct point and shared by every pair that
    contains it.
    """

    pairs: list[tuple]
    D: np.ndarray  # shape (len(pairs), horizon + 1)
    flags: OrbitFlags

    @property
    def horizon(self) -> int:
        return self.D.shape[1] - 1


def pair_tables(space: MetricSpace, map: SelfMap, pairs: Sequence[tuple], H: int) -> PairTables:
    _check_space(space, map)
    xs = space.codes([p[0] for p in pairs])
    ys = space.codes([p[1] for p in pairs])
    uniq, inv = np.unique(np.concatenate([xs, ys]), return_inverse=True)
    orbits, flags = map.orbit_codes(uniq, H)
    n = len(pairs)
    D = space.pairwise(orbits[inv[:n]], orbits[inv[n:]]).astype(float)
    return PairTables(list(pairs), D, flags)
