"""Residual reports and their JSON / CSV / text renderings."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    DEGENERATE = "degenerate"
    SKIPPED = "skipped"

    @property
    def ok(self) -> bool:
        return self is not Verdict.FAIL


def relative_residual(diff: float, *terms: float) -> float:
    """``|diff|`` scaled by the largest term when that exceeds one."""
    scale = max([1.0, *(abs(t) for t in terms if math.isfinite(t))])
    return abs(diff) / scale


@dataclass(frozen=True)
class PointResidual:
    point: tuple[float, float]
    residual: float
    values: dict[str, float] = field(default_factory=dict)
    degenerate: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "point": [_num(self.point[0]), _num(self.point[1])],
            "residual": _num(self.residual),
            "values": {k: _num(v) for k, v in sorted(self.values.items())},
            "degenerate": self.degenerate,
        }


@dataclass
class ResidualReport:
    check: str
    example: str
    grid: str
    jet_order: int
    tolerance: float
    points: list[PointResidual] = field(default_factory=list)
    verdict: Verdict = Verdict.PASS
    extras: dict[str, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)
    # integral checks report one residual for the whole grid
    summary_residual: float | None = None

    @property
    def max_residual(self) -> float:
        if self.summary_residual is not None:
            return self.summary_residual
        return max((p.residual for p in self.points), default=0.0)

    @property
    def mean_residual(self) -> float:
        if not self.points:
            return 0.0
        return math.fsum(p.residual for p in self.points) / len(self.points)

    def column(self, name: str) -> list[float]:
        return [p.values[name] for p in self.points if name in p.values]

    def column_max(self, name: str) -> float:
        return max((abs(v) for v in self.column(name)), default=0.0)

    def decide(self) -> Verdict:
        """Verdict from the residuals: pass iff the max residual is within tolerance."""
        if self.verdict is Verdict.SKIPPED:
            return self.verdict
        worst = self.max_residual
        if not math.isfinite(worst) or worst > self.tolerance:
            self.verdict = Verdict.FAIL
        elif self.points and all(p.degenerate for p in self.points):
            self.verdict = Verdict.DEGENERATE
        else:
            self.verdict = Verdict.PASS
        return self.verdict

    def to_dict(self) -> dict[str, Any]:
        return {
            "check": self.check,
            "example": self.example,
            "grid": self.grid,
            "jet_order": self.jet_order,
            "tolerance": _num(self.tolerance),
            "max_residual": _num(self.max_residual),
            "mean_residual": _num(self.mean_residual),
            "verdict": self.verdict.value,
            "extras": {k: _num(v) for k, v in sorted(self.extras.items())},
            "notes": list(self.notes),
            "metadata": dict(self.metadata),
            "points": [p.to_dict() for p in self.points],
        }


def skipped_report(check: str, example: str, reason: str, *, grid: str = "", jet_order: int = 0) -> ResidualReport:
    return ResidualReport(check, example, grid, jet_order, 0.0, verdict=Verdict.SKIPPED, notes=[reason])


def _num(value: float) -> float | None:
    v = float(value)
    return v if math.isfinite(v) else None


def reports_to_json(reports: Sequence[ResidualReport], *, meta: Mapping[str, Any] | None = None) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    payload: dict[str, Any] = {"reports": [r.to_dict() for r in reports]}
    if meta:
        payload["meta"] = dict(meta)
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def reports_to_csv(reports: Iterable[ResidualReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["check", "example", "x", "y", "residual", "degenerate"])
    for r in reports:
        for p in r.points:
            writer.writerow([r.check, r.example, repr(p.point[0]), repr(p.point[1]), repr(p.residual), int(p.degenerate)])
    return buffer.getvalue()


__all__ = [
    "PointResidual",
    "ResidualReport",
    "Verdict",
    "relative_residual",
    "reports_to_csv",
    "reports_to_json",
    "skipped_report",
]
