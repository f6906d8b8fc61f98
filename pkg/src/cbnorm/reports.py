"""Named-check reports with JSON emission."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg as la


@dataclass
class Check:
    name: str
    residual: float
    tol: float
    passed: bool
    description: str = ""


@dataclass
class CertificationReport:
    """A list of checks; the verdict is the conjunction of their pass flags.

    ``info`` holds checks and values that are reported but do not vote.
    """

    title: str = ""
    checks: list[Check] = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, residual: float, tol: float, description: str = "",
            passed: bool | None = None) -> Check:
        residual = float(residual)
        if passed is None:
            passed = bool(residual <= tol)
        c = Check(name, residual, float(tol), bool(passed), description)
        self.checks.append(c)
        return c

    def extend(self, other: "CertificationReport", prefix: str = ""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.residual, c.tol, c.passed, c.description))

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {
            "title": self.title,
            "verdict": self.verdict,
            "checks": [
                {"name": c.name, "residual": c.residual, "tol": c.tol, "pass": c.passed}
                for c in self.checks
            ],
            "witnesses": to_jsonable(self.witnesses),
            "info": to_jsonable(self.info),
        }

    def summary(self) -> str:
        lines = [f"{self.title or 'report'}: {'PASS' if self.verdict else 'FAIL'}"]
        for c in self.checks:
            mark = "ok  " if c.passed else "FAIL"
            lines.append(f"  [{mark}] {c.name}: residual={c.residual:.3e} tol={c.tol:.1e}")
        for k, v in self.info.items():
            if isinstance(v, (int, float, bool, str)):
                lines.append(f"  {k} = {v}")
        return "\n".join(lines)


def to_jsonable(obj):
    """Recursively convert arrays and numpy scalars into JSON-ready values."""
    if isinstance(obj, np.ndarray):
        if obj.ndim == 1:
            obj = obj.reshape(-1, 1)
        return la.matrix_to_json(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return obj
