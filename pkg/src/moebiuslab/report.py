"""Run reports, their deterministic JSON form and the published schema."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from typing import Any

import numpy as np

from .classifier import ClassificationReport

SCHEMA_ID = "moebiuslab-report/1"


@dataclass(frozen=True)
class CheckStat:
    name: str
    tolerance: float
    max: float
    median: float
    passed: bool


@dataclass(frozen=True)
class RunReport:
    tool: str
    version: str
    command: str
    target: str
    params: dict
    config: dict
    checks: tuple[CheckStat, ...]
    verdicts: dict
    outcome: str
    exit_code: int
    wall_time: float | None = None
    notes: tuple[str, ...] = ()
    classification: dict | None = None

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_ID,
            "tool": self.tool,
            "version": self.version,
            "command": self.command,
            "target": self.target,
            "params": dict(self.params),
            "config": dict(self.config),
            "checks": [
                {"name": c.name, "tolerance": c.tolerance, "max": c.max, "median": c.median, "passed": c.passed}
                for c in self.checks
            ],
            "verdicts": dict(self.verdicts),
            "classification": self.classification,
            "outcome": self.outcome,
            "exit_code": self.exit_code,
            "wall_time": self.wall_time,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> RunReport:
        checks = tuple(CheckStat(**c) for c in d["checks"])
        kw = {f.name: d.get(f.name) for f in fields(cls) if f.name not in ("checks", "notes")}
        return cls(checks=checks, notes=tuple(d.get("notes", ())), **kw)


def check_stat(name: str, values, tolerance: float) -> CheckStat:
    arr = np.asarray(values, dtype=float)
    mx = float(arr.max())
    return CheckStat(name, float(tolerance), mx, float(np.median(arr)), bool(mx < tolerance))


def classification_dict(r: ClassificationReport) -> dict:
    return {
        "branch": r.branch,
        "n": r.n,
        "seed": r.seed,
        "point_count": r.point_count,
        "cluster_count": r.cluster_count,
        "multiplicities": list(r.multiplicities),
        "matching_quality": _finite(r.matching_quality),
        "verdict": r.verdict.verdict.value,
        "direct_residual": _finite(r.verdict.direct),
        "spectral_residual": _finite(r.verdict.spectral),
        "route_agreement": r.route_agreement,
        "constancy": [
            {"quantity": c.quantity, "min": c.minimum, "max": c.maximum, "spread": c.spread, "constant": c.constant}
            for c in r.constancy
        ],
        "evidence": {k: _clean(v) for k, v in r.evidence.items()},
        "notes": [n for n in r.notes if n],
    }


def _finite(x):
    return None if x is None or (isinstance(x, float) and not math.isfinite(x)) else x


def _clean(v):
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (float, np.floating)):
        return _finite(float(v))
    return v


# -- deterministic serializer ----------------------------------------------


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _emit(obj: Any, indent: int, level: int, out: list[str]) -> None:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(k))}: ")
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(items):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON with insertion-ordered keys and floats at 17 significant digits."""
    out: list[str] = []
    _emit(obj, indent, 0, out)
    return "".join(out) + "\n"


# -- schema -----------------------------------------------------------------

_NUM = {"type": ["number", "null"]}

CHECK_SCHEMA = {
    "type": "object",
    "required": ["name", "tolerance", "max", "median", "passed"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "max": _NUM,
        "median": _NUM,
        "passed": {"type": "boolean"},
    },
}

CLASSIFICATION_SCHEMA = {
    "type": "object",
    "required": ["branch", "n", "seed", "point_count", "multiplicities", "verdict", "constancy", "evidence", "notes"],
    "properties": {
        "branch": {
            "enum": [
                "TwoCurv-i",
                "TwoCurv-ii",
                "TwoCurv-iii",
                "TwoCurv-iv",
                "TwoCurv-v",
                "TwoCurv-curve",
                "ThreeCurv-ConeClifford",
                "ThreeCurv-RotHypCylinder",
                "ThreeCurv-MoebiusParallel",
                "NotSemiParallel",
                "Indeterminate",
            ]
        },
        "n": {"type": "integer", "minimum": 2},
        "seed": {"type": "integer"},
        "point_count": {"type": "integer", "minimum": 8},
        "cluster_count": {"type": "integer"},
        "multiplicities": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "matching_quality": _NUM,
        "verdict": {"enum": ["SemiParallel", "NotSemiParallel", "Indeterminate"]},
        "direct_residual": _NUM,
        "spectral_residual": _NUM,
        "route_agreement": {"type": "number", "minimum": 0, "maximum": 1},
        "constancy": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["quantity", "min", "max", "spread", "constant"],
                "properties": {
                    "quantity": {"type": "string"},
                    "min": {"type": "number"},
                    "max": {"type": "number"},
                    "spread": {"type": "number", "minimum": 0},
                    "constant": {"type": "boolean"},
                },
            },
        },
        "evidence": {"type": "object"},
        "notes": {"type": "array", "items": {"type": "string"}},
    },
}

RUN_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": SCHEMA_ID,
    "title": "moebiuslab run report",
    "type": "object",
    "required": [
        "schema",
        "tool",
        "version",
        "command",
        "target",
        "params",
        "config",
        "checks",
        "verdicts",
        "classification",
        "outcome",
        "exit_code",
        "wall_time",
        "notes",
    ],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "tool": {"const": "moebiuslab"},
        "version": {"type": "string"},
        "command": {"enum": ["verify", "classify"]},
        "target": {"type": "string"},
        "params": {"type": "object"},
        "config": {
            "type": "object",
            "required": ["samples", "seed", "tol", "tol_cluster", "tol_constancy", "inset"],
            "properties": {
                "samples": {"type": "integer", "minimum": 8},
                "seed": {"type": "integer"},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "tol_cluster": {"type": "number", "exclusiveMinimum": 0},
                "tol_constancy": {"type": "number", "exclusiveMinimum": 0},
                "inset": {"type": "number", "minimum": 0},
            },
        },
        "checks": {"type": "array", "items": CHECK_SCHEMA},
        "verdicts": {"type": "object"},
        "classification": {"oneOf": [{"type": "null"}, CLASSIFICATION_SCHEMA]},
        "outcome": {"enum": ["pass", "negative", "indeterminate"]},
        "exit_code": {"enum": [0, 1, 2]},
        "wall_time": _NUM,
        "notes": {"type": "array", "items": {"type": "string"}},
    },
}

CATALOG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "moebiuslab catalog listing",
    "type": "array",
    "items": {
        "type": "object",
        "required": ["name", "params", "branch", "kind", "description"],
        "additionalProperties": False,
        "properties": {
            "name": {"type": "string"},
            "params": {"type": "object", "additionalProperties": {"type": "number"}},
            "branch": {"type": "string"},
            "kind": {"enum": ["closed-form", "curve", "control"]},
            "description": {"type": "string"},
        },
    },
}
