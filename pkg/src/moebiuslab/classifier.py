"""Sample-based classification of semi-parallel hypersurfaces.

``classify`` evaluates the Moebius invariants at seeded sample points,
matches eigenvalue clusters across points, checks semi-parallelity by both
routes and decides which branch of the classification the samples fit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InsufficientSamples
from .invariants import moebius_data, moebius_field
from .jets import DEFAULT_INSET, ImmersionSpec, evaluate_jet, sample_points
from .semiparallel import (
    DEFAULT_TOL,
    DEFAULT_TOL_CLUSTER,
    PointAnalysis,
    SemiparallelVerdict,
    Verdict,
    analyze_point,
    verdict,
)

MIN_POINTS = 8

BRANCHES = (
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
)


@dataclass(frozen=True)
class SampleConfig:
    point_count: int = 32
    seed: int = 0
    tol_cluster: float = DEFAULT_TOL_CLUSTER
    tol: float = DEFAULT_TOL
    tol_constancy: float = 1e-6
    inset: float = DEFAULT_INSET

    def __post_init__(self):
        if self.point_count < MIN_POINTS:
            raise InsufficientSamples(f"need at least {MIN_POINTS} sample points, got {self.point_count}")
        for name in ("tol_cluster", "tol", "tol_constancy"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.inset < 0.5:
            raise ValueError("inset must lie in [0, 0.5)")


@dataclass(frozen=True)
class ConstancyRow:
    quantity: str
    minimum: float
    maximum: float
    spread: float
    constant: bool


def constancy_table(values: dict[str, Sequence[float]], tol: float = 1e-6) -> list[ConstancyRow]:
    """Max-minus-min spread of each quantity across points, in insertion order."""
    rows = []
    for name, vals in values.items():
        arr = np.asarray(vals, dtype=float)
        if arr.size == 0:
            raise ValueError(f"no values for {name}")
        lo, hi = float(arr.min()), float(arr.max())
        rows.append(ConstancyRow(name, lo, hi, hi - lo, hi - lo < tol))
    return rows


@dataclass(frozen=True)
class ClassificationReport:
    spec_name: str
    n: int
    seed: int
    point_count: int
    cluster_count: int
    multiplicities: tuple[int, ...]
    matching_quality: float
    verdict: SemiparallelVerdict
    route_agreement: float
    constancy: tuple[ConstancyRow, ...]
    branch: str
    evidence: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def row(self, quantity: str) -> ConstancyRow:
        for r in self.constancy:
            if r.quantity == quantity:
                return r
        raise KeyError(quantity)


def map_points(fn: Callable, items: Iterable, workers: int | None = None) -> list:
    """Apply ``fn`` to every item, optionally on a thread pool; order is preserved."""
    items = list(items)
    if not workers or workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def analyze_points(spec: ImmersionSpec, points, cfg: SampleConfig, workers: int | None = None) -> list[PointAnalysis]:
    def one(x):
        md = moebius_data(moebius_field(evaluate_jet(spec, x)))
        return analyze_point(md, cfg.tol, cfg.tol_cluster)

    return map_points(one, points, workers)


def match_clusters(reference: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, float]:
    """Assignment of ``values`` to ``reference`` clusters by nearest lambda_bar.

    Returns ``perm`` with ``values[perm[i]]`` matched to ``reference[i]`` and
    the largest matched distance.
    """
    cost = np.abs(reference[:, None] - values[None, :])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(len(reference), dtype=int)
    perm[rows] = cols
    return perm, float(cost[rows, cols].max())


def _two_cluster_branch(invariants: np.ndarray, constant: bool, spec: ImmersionSpec, tol: float):
    if not constant:
        gen = spec.metadata.get("generator")
        if gen in ("iv", "v"):
            return f"TwoCurv-{gen}", "curve type resolved from catalog metadata"
        return "TwoCurv-curve", "curve type, not sub-resolved"
    lo = float(invariants.min())
    if abs(lo) < tol:
        return "TwoCurv-i", "smallest cluster invariant vanishes"
    if lo < 0:
        return "TwoCurv-ii", "a cluster invariant is negative"
    return "TwoCurv-iii", "both cluster invariants are positive"


def classify(spec: ImmersionSpec, cfg: SampleConfig | None = None, workers: int | None = None) -> ClassificationReport:
    cfg = cfg or SampleConfig()
    points = sample_points(spec, cfg.point_count, cfg.seed, cfg.inset)
    analyses = analyze_points(spec, points, cfg, workers)
    n = spec.n
    notes: list[str] = []

    directs = np.array([a.verdict.direct for a in analyses])
    spectrals = np.array([a.verdict.spectral for a in analyses])
    point_verdicts = [a.verdict.verdict for a in analyses]
    if np.any(np.isnan(spectrals)):
        agg = SemiparallelVerdict(
            float(directs.max()), float("nan"), Verdict.INDETERMINATE, cfg.tol, "unresolved clusters at some points"
        )
    else:
        agg = verdict(float(directs.max()), float(spectrals.max()), cfg.tol)
    agreement = float(np.mean([v != Verdict.INDETERMINATE for v in point_verdicts]))

    evidence = {
        "max_direct": float(directs.max()),
        "max_spectral": float(np.nanmax(spectrals)) if not np.all(np.isnan(spectrals)) else float("nan"),
        "max_commutator": float(max(a.data.commutator for a in analyses)),
        "max_omega_norm": float(max(np.sqrt(a.data.omega @ np.linalg.solve(a.data.gs, a.data.omega)) for a in analyses)),
    }

    sigs = {a.spectrum.multiplicities for a in analyses}
    counts = {len(a.spectrum.clusters) for a in analyses}

    def report(branch, mults=(), quality=float("nan"), constancy=()):
        return ClassificationReport(
            spec_name=spec.name,
            n=n,
            seed=cfg.seed,
            point_count=cfg.point_count,
            cluster_count=len(mults) if mults else (counts.pop() if len(counts) == 1 else -1),
            multiplicities=tuple(mults),
            matching_quality=quality,
            verdict=agg,
            route_agreement=agreement,
            constancy=tuple(constancy),
            branch=branch,
            evidence=evidence,
            notes=tuple(notes),
        )

    if agg.verdict == Verdict.NOT_SEMI_PARALLEL:
        return report("NotSemiParallel")
    if agg.verdict == Verdict.INDETERMINATE:
        notes.append(agg.diagnostic)
        return report("Indeterminate")
    if len(counts) != 1:
        notes.append(f"cluster count varies across points: {sorted(counts)}")
        return report("Indeterminate")

    # match clusters across points against the first point
    ref = analyses[0].spectrum
    ref_vals = ref.values
    lam_rows, theta_rows, inv_rows, quality = [], [], [], 0.0
    for a in analyses:
        perm, dist = match_clusters(ref_vals, a.spectrum.values)
        quality = max(quality, dist)
        cl = [a.spectrum.clusters[p] for p in perm]
        if tuple(c.multiplicity for c in cl) != ref.multiplicities:
            notes.append(f"multiplicity signature changes across points: {sorted(sigs)}")
            return report("Indeterminate", ref.multiplicities, quality)
        lam_rows.append([c.value for c in cl])
        theta_rows.append([c.theta for c in cl])
        inv_rows.append([c.invariant for c in cl])
    lam = np.array(lam_rows)
    inv = np.array(inv_rows)
    mults = ref.multiplicities
    k = len(mults)

    values: dict[str, np.ndarray] = {}
    for i in range(k):
        values[f"lambda_bar[{i}]"] = lam[:, i]
    for i in range(k):
        values[f"invariant[{i}]"] = inv[:, i]
    values["s_star"] = np.array([a.data.s_star for a in analyses])
    table = constancy_table(values, cfg.tol_constancy)
    by_name = {r.quantity: r for r in table}
    inv_const = all(by_name[f"invariant[{i}]"].constant for i in range(k))
    lam_const = all(by_name[f"lambda_bar[{i}]"].constant for i in range(k))
    s_const = by_name["s_star"].constant
    evidence["cluster_values"] = [float(v) for v in lam.mean(axis=0)]
    evidence["cluster_invariants"] = [float(v) for v in inv.mean(axis=0)]
    evidence["min_abs_invariant"] = float(np.abs(inv).min())

    def finish(branch):
        expected = spec.metadata.get("branch")
        if expected and expected != branch:
            notes.append(f"catalog metadata expects {expected}")
        return report(branch, mults, quality, table)

    if k == 2:
        notes.append("two clusters: the pairwise identity is applied to the single cluster pair")
        branch, why = _two_cluster_branch(inv.mean(axis=0), inv_const, spec, cfg.tol_constancy)
        notes.append(why)
        return finish(branch)

    if k == 3:
        big = [i for i, m in enumerate(mults) if m >= 2]
        if n == 3 and mults == (1, 1, 1):
            if inv_const and lam_const:
                notes.append("n = 3: three simple clusters, matched to the cone over a homogeneous torus")
                return finish("ThreeCurv-ConeClifford")
            notes.append("n = 3 with non-constant cluster data")
            return finish("Indeterminate")
        if len(big) == 1 and mults[big[0]] == n - 2:
            j = big[0]
            others = [i for i in range(3) if i != j]
            lam_bar = lam.mean(axis=0)
            inv_j = float(inv[:, j].mean())
            side = float((lam_bar[j] - lam_bar[others[0]]) * (lam_bar[j] - lam_bar[others[1]]))
            evidence["multiple_cluster_invariant"] = inv_j
            evidence["multiple_cluster_position"] = side
            if not inv_const:
                notes.append("cluster invariants are not constant across points")
                return finish("Indeterminate")
            if abs(inv_j) < cfg.tol_constancy:
                notes.append("multiple-cluster invariant vanishes; branch not separated")
                return finish("Indeterminate")
            if inv_j < 0:
                notes.append("multiple cluster lies between the simple ones (negative invariant)")
                return finish("ThreeCurv-ConeClifford")
            notes.append("multiple cluster lies outside the simple ones (positive invariant)")
            return finish("ThreeCurv-RotHypCylinder")
        if len(big) >= 2:
            if s_const and lam_const:
                return finish("ThreeCurv-MoebiusParallel")
            notes.append("two multiple clusters but s* or lambda_bar not constant")
            return finish("Indeterminate")
    notes.append(f"no branch for multiplicities {mults}")
    return finish("Indeterminate")
