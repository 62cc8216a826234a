"""JSON and CSV emitters with stable field names."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from palab.metric import INF

SCHEMA_VERSION = "1.0"


@dataclass
class Measurement:
    name: str
    value: Any
    expected: Any
    provenance: str
    tolerance: float | None
    passed: bool
    discrepancy: bool = False

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "expected": self.expected,
            "provenance": self.provenance,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "discrepancy": self.discrepancy,
        }


def approx(name, value, expected, tolerance, provenance, *, relative=False) -> Measurement:
    value, expected = float(value), float(expected)
    err = abs(value - expected)
    if relative:
        err /= abs(expected)
    return Measurement(name, value, expected, provenance, tolerance, bool(err <= tolerance))


def exact(name, value, expected, provenance) -> Measurement:
    return Measurement(name, value, expected, provenance, 0.0, bool(value == expected))


def claim(name, value, expected, passed, provenance, tolerance=None, *, discrepancy=False) -> Measurement:
    return Measurement(name, value, expected, provenance, tolerance, bool(passed), discrepancy)


def build_report(
    command: str,
    *,
    space=None,
    map=None,
    spec=None,
    verdict: str,
    witness=None,
    measurements=(),
    notes=(),
    **extra,
) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "space": space.describe() if space is not None else None,
        "map": map.describe() if map is not None else None,
        "spec": spec.to_json() if spec is not None else None,
        "verdict": verdict,
        "witness": witness.to_json() if witness is not None else None,
        "measurements": [m.to_json() for m in measurements],
        "notes": list(notes),
    }
    out.update(extra)
    return out


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if obj is INF:
        return "inf"
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def write_json(obj, path: str | Path) -> None:
    Path(path).write_text(dumps(obj))


def profile_csv(sums) -> str:
    """Columns ``n, S_n, S1_n, rho_n``; ``rho_n`` is empty where undefined."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "S_n", "S1_n", "rho_n"])
    for n, s, s1, rho in sums.rows():
        w.writerow([n, repr(s), repr(s1), "" if rho is None else repr(rho)])
    return buf.getvalue()
