"""Residual bookkeeping and report serialization (JSON and CSV)."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import operator

OPS = {">": operator.gt, ">=": operator.ge, "<=": operator.le}
CSV_HEADER = ["name", "samples", "skipped", "max_res", "mean_res", "tol", "pass"]


@dataclass
class IdentityResidual:
    name: str
    samples: int
    skipped: int
    max_res: float | None
    mean_res: float | None
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "samples": self.samples,
            "skipped": self.skipped,
            "max_res": self.max_res,
            "mean_res": self.mean_res,
            "tol": self.tol,
            "pass": self.passed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IdentityResidual":
        return cls(d["name"], d["samples"], d["skipped"], d["max_res"], d["mean_res"], d["tol"], d["pass"])


@dataclass
class Check:
    """A scalar comparison that is not a residual, e.g. a strictly positive minimum."""

    name: str
    value: float | None
    op: str  # one of OPS
    bound: float
    passed: bool

    @classmethod
    def make(cls, name: str, value: float | None, op: str, bound: float) -> "Check":
        if op not in OPS:
            raise ValueError(f"unsupported comparison {op!r}")
        if value is None or math.isnan(value):
            return cls(name, None, op, float(bound), False)
        ok = OPS[op](value, bound)
        return cls(name, float(value), op, float(bound), bool(ok))

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "op": self.op, "bound": self.bound, "pass": self.passed}

    @classmethod
    def from_dict(cls, d: dict) -> "Check":
        return cls(d["name"], d["value"], d["op"], d["bound"], d["pass"])


class Accumulator:
    """Running max/mean of a residual; merges associatively."""

    def __init__(self, name: str, tol: float):
        self.name = name
        self.tol = float(tol)
        self.count = 0
        self.skipped = 0
        self.total = 0.0
        self.worst = 0.0

    def add(self, value: float) -> None:
        value = float(value)
        self.count += 1
        self.total += value
        # NaN is sticky so that it fails the residual
        if math.isnan(value) or value > self.worst:
            self.worst = value

    def skip(self, n: int = 1) -> None:
        self.skipped += n

    def merge(self, other: "Accumulator") -> "Accumulator":
        out = Accumulator(self.name, self.tol)
        out.count = self.count + other.count
        out.skipped = self.skipped + other.skipped
        out.total = self.total + other.total
        out.worst = math.nan if math.isnan(self.worst) or math.isnan(other.worst) else max(self.worst, other.worst)
        return out

    def result(self, tol: float | None = None) -> IdentityResidual:
        tol = self.tol if tol is None else float(tol)
        if self.count == 0:
            return IdentityResidual(self.name, 0, self.skipped, None, None, tol, False)
        worst = None if math.isnan(self.worst) else self.worst
        mean = self.total / self.count
        mean = None if math.isnan(mean) else mean
        passed = worst is not None and worst <= tol
        return IdentityResidual(self.name, self.count, self.skipped, worst, mean, tol, passed)


@dataclass
class ReportDocument:
    tool: str
    version: str
    config: dict
    conventions: dict
    residuals: list[IdentityResidual] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    diagnostics: list[IdentityResidual] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    duration_s: float = 0.0

    @property
    def overall_pass(self) -> bool:
        return all(r.passed for r in self.residuals) and all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "tool": self.tool,
            "version": self.version,
            "config": self.config,
            "conventions": self.conventions,
            "overall_pass": self.overall_pass,
            "residuals": [r.to_dict() for r in self.residuals],
            "checks": [c.to_dict() for c in self.checks],
            "diagnostics": [r.to_dict() for r in self.diagnostics],
            "metrics": self.metrics,
            "duration_s": self.duration_s,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReportDocument":
        doc = cls(
            tool=d["tool"],
            version=d["version"],
            config=d["config"],
            conventions=d["conventions"],
            residuals=[IdentityResidual.from_dict(r) for r in d["residuals"]],
            checks=[Check.from_dict(c) for c in d["checks"]],
            diagnostics=[IdentityResidual.from_dict(r) for r in d["diagnostics"]],
            metrics=d["metrics"],
            duration_s=d["duration_s"],
        )
        if d.get("overall_pass") is not None and d["overall_pass"] != doc.overall_pass:
            raise ValueError("overall_pass disagrees with the residuals")
        return doc


def to_json(report: ReportDocument) -> str:
    return json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"


def from_json(text: str) -> ReportDocument:
    return ReportDocument.from_dict(json.loads(text))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value)


def to_csv(report: ReportDocument) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    rows = [(r, r.name) for r in report.residuals] + [(r, f"diagnostic:{r.name}") for r in report.diagnostics]
    for r, name in rows:
        writer.writerow([name, r.samples, r.skipped, _fmt(r.max_res), _fmt(r.mean_res), _fmt(r.tol), _fmt(r.passed)])
    return buf.getvalue()


def from_csv(text: str) -> list[IdentityResidual]:
    reader = csv.DictReader(io.StringIO(text, newline=""))
    if reader.fieldnames != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")

    def num(s):
        return None if s == "" else float(s)

    return [
        IdentityResidual(row["name"], int(row["samples"]), int(row["skipped"]), num(row["max_res"]),
                         num(row["mean_res"]), float(row["tol"]), row["pass"] == "true")
        for row in reader
    ]


def emit(report: ReportDocument, fmt: str = "json") -> bytes:
    if fmt == "json":
        return to_json(report).encode()
    if fmt == "csv":
        return to_csv(report).encode()
    raise ValueError(f"unknown format {fmt!r}")
