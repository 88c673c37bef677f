from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import pytest

from moebiuslab import catalog
from moebiuslab.invariants import MoebiusField, StructureResiduals, moebius_data, moebius_field, structure_residuals
from moebiuslab.jets import evaluate_jet, sample_points
from moebiuslab.semiparallel import PointAnalysis, analyze_point

SEED = 7
POINTS = 32

# Acceptance lines collected during the run, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


@dataclass(frozen=True)
class PointRecord:
    x: np.ndarray
    field: MoebiusField
    residuals: StructureResiduals
    analysis: PointAnalysis


@lru_cache(maxsize=None)
def point_records(name: str, seed: int = SEED, count: int = POINTS) -> tuple[PointRecord, ...]:
    """Invariants at seeded sample points, shared across test modules."""
    spec = catalog.get(name)
    out = []
    for x in sample_points(spec, count, seed):
        mf = moebius_field(evaluate_jet(spec, x))
        out.append(PointRecord(x, mf, structure_residuals(mf), analyze_point(moebius_data(mf))))
    return tuple(out)


def default_names() -> list[str]:
    return [catalog.canonical_name(e.name, e.params) for e in catalog.list_entries()]


@pytest.fixture(scope="session")
def records():
    return point_records


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
