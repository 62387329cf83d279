"""Serializable run reports: named residual checks plus payload sections."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["CheckRecord", "Report", "jsonable"]


@dataclass
class CheckRecord:
    name: str
    residual: float
    tolerance: float

    def __post_init__(self):
        self.residual = float(self.residual)
        self.tolerance = float(self.tolerance)

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


@dataclass
class Report:
    """Outcome of one verification or solver run.

    checks carry (name, residual, tolerance) triples; spectra / solutions /
    extras are free-form payload; timings live apart so reports stay
    byte-comparable modulo wall-clock noise.
    """

    config: dict[str, Any] = field(default_factory=dict)
    checks: list[CheckRecord] = field(default_factory=list)
    spectra: list[dict[str, Any]] = field(default_factory=list)
    solutions: list[dict[str, Any]] = field(default_factory=list)
    extras: dict[str, Any] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    tool_version: str = ""

    def add(self, name: str, residual: float, tolerance: float) -> CheckRecord:
        rec = CheckRecord(name, residual, tolerance)
        self.checks.append(rec)
        return rec

    def extend(self, other: "Report", prefix: str = "") -> None:
        for rec in other.checks:
            self.checks.append(CheckRecord(prefix + rec.name, rec.residual, rec.tolerance))

    @property
    def passed(self) -> bool:
        return all(rec.passed for rec in self.checks)

    @property
    def failures(self) -> list[CheckRecord]:
        return [rec for rec in self.checks if not rec.passed]

    def to_dict(self) -> dict[str, Any]:
        """Deterministic field order; numbers pass through jsonable()."""
        return {
            "tool_version": self.tool_version,
            "config": jsonable(self.config),
            "checks": [
                {
                    "name": rec.name,
                    "residual": jsonable(rec.residual),
                    "tolerance": jsonable(rec.tolerance),
                    "pass": rec.passed,
                }
                for rec in self.checks
            ],
            "spectra": jsonable(self.spectra),
            "solutions": jsonable(self.solutions),
            "extras": jsonable(self.extras),
            "timings": jsonable(self.timings),
        }


def jsonable(obj):
    """Recursively map values onto JSON types.

    Complex numbers become [re, im]; floats are round-tripped through a
    17-significant-digit representation so serialisation is bit-stable.
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        return [jsonable(z.real), jsonable(z.imag)]
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.17g}")
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    return obj
