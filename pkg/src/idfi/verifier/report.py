"""Verification records and report serialization.

Margin convention: margin is the signed slack of the claimed relation,
so a check passes iff margin >= -tolerance.  For one-sided claims
lhs <= rhs the slack is rhs - lhs; for equality claims it is -|lhs - rhs|.
Reports serialize to JSON with a fixed key order; `canonical_bytes`
strips the timing fields (generated_at, wall_time_s, per-record seconds),
and the remaining bytes are the determinism contract.
"""

from __future__ import annotations

import datetime
import io
import json
import math
from dataclasses import dataclass, field

from idfi.errors import ValidationError
from idfi.verifier.anchors import check_anchor

REPORT_SCHEMA_VERSION = "1"

STATUSES = ("pass", "fail", "vacuous", "unsupported", "inconclusive")


@dataclass(frozen=True)
class CheckRecord:
    """One inequality check, possibly aggregated over a case battery.

    lhs/rhs/margin refer to the worst case of the battery; estimators
    tags each side (analytic | quadrature | finite-difference |
    monte-carlo | ode), std_errors carries Monte Carlo standard errors
    where one side is sampled.  seconds is timing metadata and is
    excluded from the determinism comparison.
    """

    check_id: str
    anchor: str
    status: str
    lhs: float | None = None
    rhs: float | None = None
    margin: float | None = None
    tolerance: float | None = None
    estimators: dict = field(default_factory=dict)
    std_errors: dict = field(default_factory=dict)
    cases: int = 1
    worst_case: str = ""
    detail: str = ""
    seconds: float = 0.0

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValidationError(f"unknown record status {self.status!r}")
        check_anchor(self.anchor)
        if self.status == "pass":
            if self.margin is None or not math.isfinite(self.margin):
                raise ValidationError(
                    f"{self.check_id}: a passing record needs a finite margin"
                )

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "anchor": self.anchor,
            "status": self.status,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "estimators": dict(self.estimators),
            "std_errors": dict(self.std_errors),
            "cases": self.cases,
            "worst_case": self.worst_case,
            "detail": self.detail,
            "seconds": self.seconds,
        }

    @staticmethod
    def from_dict(d: dict) -> "CheckRecord":
        return CheckRecord(**d)


def _status_for(margin: float, tolerance: float) -> str:
    if not math.isfinite(margin):
        return "fail"
    return "pass" if margin >= -tolerance else "fail"


def le_record(check_id: str, anchor: str, lhs: float, rhs: float, tolerance: float,
              **kwargs) -> CheckRecord:
    """Record for the claim lhs <= rhs within tolerance."""
    margin = rhs - lhs
    return CheckRecord(check_id, anchor, _status_for(margin, tolerance),
                       lhs=lhs, rhs=rhs, margin=margin, tolerance=tolerance, **kwargs)


def eq_record(check_id: str, anchor: str, lhs: float, rhs: float, tolerance: float,
              **kwargs) -> CheckRecord:
    """Record for the claim lhs = rhs within tolerance."""
    diff = abs(lhs - rhs) if math.isfinite(lhs) and math.isfinite(rhs) else math.inf
    margin = -diff
    return CheckRecord(check_id, anchor, _status_for(margin, tolerance),
                       lhs=lhs, rhs=rhs, margin=margin, tolerance=tolerance, **kwargs)


RECORD_CSV_HEADER = "suite,check_id,anchor,status,lhs,rhs,margin,tolerance,cases,worst_case"


@dataclass
class VerificationReport:
    suite: str
    records: list[CheckRecord]
    environment: dict
    wall_time_s: float = 0.0
    generated_at: str = ""
    artifacts: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.generated_at:
            self.generated_at = (
                datetime.datetime.now(datetime.timezone.utc).isoformat()
            )

    @property
    def counts(self) -> dict:
        out = {s: 0 for s in STATUSES}
        for r in self.records:
            out[r.status] += 1
        return out

    @property
    def exit_code(self) -> int:
        return 1 if self.counts["fail"] else 0

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "suite": self.suite,
            "generated_at": self.generated_at,
            "wall_time_s": self.wall_time_s,
            "environment": dict(self.environment),
            "counts": self.counts,
            "records": [r.to_dict() for r in self.records],
            "artifacts": sorted(self.artifacts),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @staticmethod
    def from_dict(d: dict) -> "VerificationReport":
        return VerificationReport(
            suite=d["suite"],
            records=[CheckRecord.from_dict(r) for r in d["records"]],
            environment=d["environment"],
            wall_time_s=d["wall_time_s"],
            generated_at=d["generated_at"],
        )

    def records_csv(self) -> str:
        buf = io.StringIO()
        buf.write(RECORD_CSV_HEADER + "\n")
        for r in self.records:
            buf.write(
                f"{self.suite},{r.check_id},{r.anchor},{r.status},"
                f"{_fmt(r.lhs)},{_fmt(r.rhs)},{_fmt(r.margin)},{_fmt(r.tolerance)},"
                f"{r.cases},{r.worst_case}\n"
            )
        return buf.getvalue()

    def table(self) -> str:
        head = f"suite {self.suite}  ({self.wall_time_s:.1f} s)"
        lines = [head, "-" * len(head)]
        wid = max([len(r.check_id) for r in self.records] + [8])
        wa = max([len(r.anchor) for r in self.records] + [6])
        for r in self.records:
            lines.append(
                f"{r.check_id:<{wid}}  {r.anchor:<{wa}}  {r.status:<12} "
                f"margin {_fmt(r.margin):>13}  tol {_fmt(r.tolerance):>9}  "
                f"cases {r.cases}"
            )
        c = self.counts
        lines.append(
            f"{c['pass']} pass, {c['fail']} fail, {c['vacuous']} vacuous, "
            f"{c['unsupported']} unsupported, {c['inconclusive']} inconclusive"
        )
        return "\n".join(lines) + "\n"


def _fmt(x: float | None) -> str:
    if x is None:
        return ""
    return f"{x:.6g}"


def canonical_bytes(json_text: str) -> bytes:
    """Report JSON with timing metadata nulled, for byte comparison."""
    obj = json.loads(json_text)
    obj["generated_at"] = None
    obj["wall_time_s"] = None
    for rec in obj.get("records", []):
        rec["seconds"] = None
    return (json.dumps(obj, indent=2) + "\n").encode()
