"""Measure reports and deterministic serialization."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Iterable

EXACT = "exact"
MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class MeasureReport:
    """A named measure value with how it was obtained.

    ``stderr`` and ``draws`` are set only for Monte Carlo values.  Interval
    valued measures (the distance-to-calibration bounds) fill ``lower`` and
    ``upper`` and leave ``value`` as ``None``.
    """

    name: str
    value: float | None
    method: str = EXACT
    stderr: float | None = None
    draws: int | None = None
    lower: float | None = None
    upper: float | None = None
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"measure": self.name, "method": self.method}
        if self.value is not None:
            out["value"] = self.value
        if self.lower is not None:
            out["lower"] = self.lower
            out["upper"] = self.upper
        if self.stderr is not None:
            out["stderr"] = self.stderr
        if self.draws is not None:
            out["draws"] = self.draws
        if self.params:
            out["params"] = dict(self.params)
        return out


def _plain(obj):
    # numpy scalars -> python numbers so json emits them natively
    if hasattr(obj, "item") and not isinstance(obj, (list, tuple, dict)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def dumps_json(payload) -> str:
    """JSON with stable key order; floats use the shortest exact round-trip repr."""
    return json.dumps(_plain(payload), indent=2, sort_keys=True) + "\n"


def dumps_csv(columns: list[str], rows: Iterable[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(col)) for col in columns])
    return buf.getvalue()


def _cell(value) -> str:
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)
