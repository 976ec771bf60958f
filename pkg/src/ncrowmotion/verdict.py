"""Check outcomes shared by every checker in the package."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not_applicable"
UNDEFINED_ORBIT = "undefined_orbit"
BLOWUP = "blowup"

STATUSES = (PASS, FAIL, NOT_APPLICABLE, UNDEFINED_ORBIT, BLOWUP)


@dataclass
class Verdict:
    check: str
    status: str
    trials: int = 1
    failures: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == FAIL and not self.failures:
            raise ValueError("a failing verdict needs a witness")
        if not self.counts:
            self.counts = {self.status: self.trials}

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @classmethod
    def not_applicable(cls, check: str, reason: str = "") -> "Verdict":
        return cls(check, NOT_APPLICABLE, detail={"reason": reason} if reason else {})

    @classmethod
    def undefined_orbit(cls, check: str, reason: str = "") -> "Verdict":
        return cls(check, UNDEFINED_ORBIT, detail={"reason": reason} if reason else {})

    @classmethod
    def from_failures(cls, check: str, failures: list, **detail) -> "Verdict":
        return cls(check, FAIL if failures else PASS, failures=list(failures), detail=detail)

    def to_json(self) -> dict:
        out = {
            "check": self.check,
            "status": self.status,
            "trials": self.trials,
            "counts": dict(sorted(self.counts.items())),
            "failures": self.failures,
        }
        if self.detail:
            out["detail"] = self.detail
        return out


def combine(check: str, verdicts: list, summary: Optional[str] = None) -> Verdict:
    """Aggregate per-trial verdicts.

    Any fail wins; otherwise pass if some trial passed; otherwise the most
    common inconclusive status.  Witnesses are concatenated in input order.
    """
    counts: dict = {}
    failures: list = []
    trials = 0
    for v in verdicts:
        trials += v.trials
        for k, n in v.counts.items():
            counts[k] = counts.get(k, 0) + n
        failures.extend(v.failures)
    if counts.get(FAIL):
        status = FAIL
    elif counts.get(PASS):
        status = PASS
    elif counts:
        status = max(sorted(counts), key=lambda k: counts[k])
    else:
        status = NOT_APPLICABLE
    detail = {"summary": summary} if summary else {}
    return Verdict(check, status, trials=trials, failures=failures, counts=counts, detail=detail)
