"""Check and suite records with hypothesis gating."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

HOLDS = "holds"
FAILS = "fails"
MARGINAL = "marginal"

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"
SKIPPED_MARGINAL = "skipped-marginal"

NOT_APPLICABLE = "not applicable"
ERROR = "error"


def combine(*statuses: str) -> str:
    """Worst of several hypothesis statuses (fails beats marginal beats holds)."""
    if FAILS in statuses:
        return FAILS
    if MARGINAL in statuses:
        return MARGINAL
    return HOLDS


def _num(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


@dataclass
class Check:
    anchor: str
    point: int | None
    hypothesis: str
    residual: float | None
    tol: float
    status: str
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "anchor": self.anchor,
            "point": self.point,
            "hypothesis": self.hypothesis,
            "residual": _num(self.residual),
            "tol": self.tol,
            "status": self.status,
            "detail": self.detail,
        }


def judge(anchor: str, point, hypothesis: str, residual, tol: float, detail: str = "") -> Check:
    """A check passes only when its hypothesis holds and the residual is within tol."""
    if hypothesis == FAILS:
        return Check(anchor, point, hypothesis, residual, tol, SKIPPED, detail)
    if hypothesis == MARGINAL:
        return Check(anchor, point, hypothesis, residual, tol, SKIPPED_MARGINAL, detail)
    ok = residual is not None and not math.isnan(float(residual)) and float(residual) <= tol
    return Check(anchor, point, hypothesis, residual, tol, PASS if ok else FAIL, detail)


@dataclass
class SuiteResult:
    suite: str
    metric: str
    seed: int
    points: list
    checks: list = field(default_factory=list)
    note: str = ""
    error: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        if self.error is not None:
            return ERROR
        seen = {c.status for c in self.checks}
        if FAIL in seen:
            return FAIL
        if PASS in seen:
            return PASS
        return NOT_APPLICABLE

    @property
    def ok(self) -> bool:
        return self.status in (PASS, NOT_APPLICABLE)

    def by_anchor(self, anchor: str) -> list:
        return [c for c in self.checks if c.anchor == anchor]

    def max_residual(self, anchor: str | None = None, status: str | None = PASS) -> float:
        vals = [c.residual for c in self.checks
                if (anchor is None or c.anchor == anchor) and (status is None or c.status == status)
                and c.residual is not None and not math.isnan(c.residual)]
        return max(vals) if vals else 0.0

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "metric": self.metric,
            "seed": self.seed,
            "status": self.status,
            "note": self.note,
            "error": self.error,
            "points": [[float(x) for x in p] for p in self.points],
            "checks": [c.to_json() for c in self.checks],
            "extra": self.extra,
        }


def dumps(results) -> str:
    """Deterministic JSON for a list of suite results."""
    return json.dumps([r.to_json() for r in results], sort_keys=True, indent=2, ensure_ascii=False)
