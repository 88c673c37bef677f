"""Semi-parallelity of the Moebius second fundamental form.

Two independent routes are provided: the tensorial action of the Moebius
curvature on ``B`` (``semiparallel_direct``) and the pairwise spectral
identity ``lambda_i lambda_j + theta_i + theta_j = 0`` over distinct clusters
(``semiparallel_spectral``).  ``verdict`` reconciles them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectrum, IndeterminateSpectrum
from .invariants import MoebiusData, moebius_data, moebius_field, orthonormal_frame
from .jets import ImmersionSpec, evaluate_jet
from .surfaces import CondMResult, SurfaceSpec, cond_m_residuals, surface_field

DEFAULT_TOL = 1e-6
DEFAULT_TOL_CLUSTER = 1e-6
WIDTH_RATIO = 0.1


@dataclass(frozen=True)
class Cluster:
    value: float
    multiplicity: int
    width: float
    indices: tuple[int, ...]
    theta: float

    @property
    def invariant(self) -> float:
        """``lambda^2 + 2 theta`` for this cluster."""
        return self.value**2 + 2.0 * self.theta


@dataclass(frozen=True)
class SpectrumReport:
    clusters: tuple[Cluster, ...]
    separation: float
    indeterminate: bool
    diagnostics: tuple[str, ...] = ()

    @property
    def distinct(self) -> list[tuple[float, int, float]]:
        return [(c.value, c.multiplicity, c.width) for c in self.clusters]

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(c.multiplicity for c in self.clusters)

    @property
    def theta_by_cluster(self) -> np.ndarray:
        return np.array([c.theta for c in self.clusters])

    @property
    def invariants_by_cluster(self) -> np.ndarray:
        return np.array([c.invariant for c in self.clusters])

    @property
    def values(self) -> np.ndarray:
        return np.array([c.value for c in self.clusters])


def cluster_spectrum(lambda_bar, theta, tol_cluster: float = DEFAULT_TOL_CLUSTER) -> SpectrumReport:
    """Greedy gap clustering of an ascending spectrum with paired ``theta`` values."""
    lam = np.asarray(lambda_bar, dtype=float)
    th = np.asarray(theta, dtype=float)
    if lam.ndim != 1 or lam.shape != th.shape or lam.size == 0:
        raise ValueError("lambda_bar and theta must be matching 1-d arrays")
    if np.any(np.diff(lam) < 0):
        raise ValueError("lambda_bar must be sorted ascending")
    gap_tol = tol_cluster * max(1.0, float(np.max(np.abs(lam))))
    groups = [[0]]
    for i in range(1, lam.size):
        if lam[i] - lam[i - 1] > gap_tol:
            groups.append([i])
        else:
            groups[-1].append(i)
    if len(groups) == 1:
        raise DegenerateSpectrum(f"all {lam.size} Moebius principal curvatures coincide")
    clusters = tuple(
        Cluster(
            value=float(lam[g].mean()),
            multiplicity=len(g),
            width=float(lam[g[-1]] - lam[g[0]]),
            indices=tuple(g),
            theta=float(th[g].mean()),
        )
        for g in groups
    )
    values = np.array([c.value for c in clusters])
    separation = float(np.min(np.diff(values)))
    widest = max(c.width for c in clusters)
    diagnostics = []
    indeterminate = widest >= WIDTH_RATIO * separation
    if indeterminate:
        diagnostics.append(f"cluster width {widest:.3e} is not small against separation {separation:.3e}")
    return SpectrumReport(clusters, separation, indeterminate, tuple(diagnostics))


def semiparallel_direct(R_star: np.ndarray, B: np.ndarray, g_star: np.ndarray) -> float:
    """``max ||R(X_i, X_j) B X_k - B R(X_i, X_j) X_k||*`` over a g*-orthonormal frame.

    ``R_star[a, b, c, d]`` are the components of ``R(d_c, d_d) d_b`` and ``B``
    is the coordinate matrix of the Moebius shape operator.
    """
    E = orthonormal_frame(g_star)
    Einv = np.linalg.inv(E)
    Rf = np.einsum("ap,pqrs,qb,rc,sd->abcd", Einv, R_star, E, E, E)
    Bf = Einv @ B @ E
    C = np.einsum("abij,bk->aijk", Rf, Bf) - np.einsum("ab,bkij->aijk", Bf, Rf)
    return float(np.max(np.linalg.norm(C, axis=0)))


def semiparallel_spectral(report: SpectrumReport) -> float:
    """``max |lambda_i lambda_j + theta_i + theta_j|`` over distinct cluster pairs."""
    if report.indeterminate:
        raise IndeterminateSpectrum("; ".join(report.diagnostics) or "spectrum is indeterminate")
    cs = report.clusters
    return float(
        max(abs(a.value * b.value + a.theta + b.theta) for i, a in enumerate(cs) for b in cs[i + 1 :])
    )


class Verdict(str, enum.Enum):
    SEMI_PARALLEL = "SemiParallel"
    NOT_SEMI_PARALLEL = "NotSemiParallel"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class SemiparallelVerdict:
    direct: float
    spectral: float
    verdict: Verdict
    tol: float
    diagnostic: str = ""


def verdict(direct: float, spectral: float, tol: float = DEFAULT_TOL) -> SemiparallelVerdict:
    if direct < tol and spectral < tol:
        return SemiparallelVerdict(direct, spectral, Verdict.SEMI_PARALLEL, tol)
    if direct > 10 * tol and spectral > 10 * tol:
        return SemiparallelVerdict(direct, spectral, Verdict.NOT_SEMI_PARALLEL, tol)
    if (direct < tol) != (spectral < tol):
        note = f"routes disagree: direct={direct:.3e}, spectral={spectral:.3e}, tol={tol:.1e}"
    else:
        note = f"residual inside the hysteresis band [{tol:.1e}, {10 * tol:.1e}]"
    return SemiparallelVerdict(direct, spectral, Verdict.INDETERMINATE, tol, note)


@dataclass(frozen=True)
class PointAnalysis:
    """Everything the semi-parallel checks need at one sample point."""

    data: MoebiusData
    spectrum: SpectrumReport
    verdict: SemiparallelVerdict
    notes: tuple[str, ...] = field(default=())


def analyze_point(md: MoebiusData, tol: float = DEFAULT_TOL, tol_cluster: float = DEFAULT_TOL_CLUSTER) -> PointAnalysis:
    report = cluster_spectrum(md.lambda_bar, md.theta, tol_cluster)
    direct = semiparallel_direct(md.R_star, md.B, md.gs)
    notes = []
    if len(report.clusters) == 2:
        notes.append("two clusters: the pairwise identity is applied to the single cluster pair")
    if report.indeterminate:
        v = SemiparallelVerdict(direct, float("nan"), Verdict.INDETERMINATE, tol, "; ".join(report.diagnostics))
    else:
        v = verdict(direct, semiparallel_spectral(report), tol)
    return PointAnalysis(md, report, v, tuple(notes))


def _cluster_quantity(md: MoebiusData, center: float, mult: int) -> float:
    idx = np.argsort(np.abs(md.lambda_bar - center), kind="stable")[:mult]
    lam = float(md.lambda_bar[idx].mean())
    return lam * lam + 2.0 * float(md.theta[idx].mean())


def check_warped_lemma(
    spec: ImmersionSpec,
    x,
    report: SpectrumReport | None = None,
    md: MoebiusData | None = None,
    rel_step: float = 1e-4,
    tol_cluster: float = DEFAULT_TOL_CLUSTER,
) -> dict[int, float]:
    """Directional derivatives of ``lambda^2 + 2 theta`` along each multi-dimensional cluster.

    Returns ``{cluster index: max |X_k(lambda^2 + 2 theta)|}`` where ``X_k``
    runs over the g*-unit eigenvectors of the cluster.  Derivatives are
    central differences of recomputed invariants with coordinate step
    ``rel_step`` times the largest domain width; single-eigenvalue clusters
    are skipped.
    """
    x = np.asarray(x, dtype=float)
    if md is None:
        md = moebius_data(moebius_field(evaluate_jet(spec, x)))
    if report is None:
        report = cluster_spectrum(md.lambda_bar, md.theta, tol_cluster)
    h = rel_step * float(np.max(spec.upper - spec.lower))
    out: dict[int, float] = {}
    for ci, cl in enumerate(report.clusters):
        if cl.multiplicity < 2:
            continue
        worst = 0.0
        for k in cl.indices:
            X = md.eigenframe[:, k]
            scale = float(np.linalg.norm(X))
            step = X / scale * h
            vals = []
            for sgn in (1.0, -1.0):
                mdp = moebius_data(moebius_field(evaluate_jet(spec, x + sgn * step)))
                vals.append(_cluster_quantity(mdp, cl.value, cl.multiplicity))
            worst = max(worst, abs(vals[0] - vals[1]) / (2.0 * h) * scale)
        out[ci] = worst
    return out


def check_cond_m(surface: SurfaceSpec, x, n: int) -> CondMResult:
    """Residuals of the two conditions on ``mu^-1`` for a surface in Q^3_c.

    ``mu = sqrt(4 H^2 - 2n/(n-1) (K - c))``; raises ``NonRealMu`` when the
    radicand is not positive.
    """
    return cond_m_residuals(surface_field(surface, x), n)
