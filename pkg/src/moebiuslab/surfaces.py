"""Surfaces in the three-dimensional space forms and their invariants.

Models: ``c = 0`` is Euclidean R^3, ``c = 1`` the unit sphere S^3 in R^4 and
``c = -1`` the upper half-space {z3 > 0} with metric |dz|^2 / z3^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, Mapping, Sequence

import numpy as np

from . import taylor as T
from .errors import NonRealMu, PointOutsideDomain, SurfaceModelMismatch
from .invariants import christoffel, orthonormal_frame, riemann
from .taylor import DEFAULT_DEGREE, Taylor

AMBIENT_DIM = {0: 3, 1: 4, -1: 3}


@dataclass(frozen=True)
class SurfaceSpec:
    """Chart ``eval: (u, v) -> model point`` of a surface in Q^3_c."""

    name: str
    c: int
    domain: tuple[tuple[float, float], tuple[float, float]]
    eval: Callable[[tuple], Sequence] = field(repr=False, compare=False)
    params: Mapping[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.c not in AMBIENT_DIM:
            raise SurfaceModelMismatch(f"space-form curvature must be 0, 1 or -1, got {self.c}")
        if len(self.domain) != 2:
            raise ValueError("surface domain must have two axes")

    @property
    def lower(self) -> np.ndarray:
        return np.array([a for a, _ in self.domain], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([b for _, b in self.domain], dtype=float)

    def position(self, x) -> np.ndarray:
        return np.array([float(c) for c in self.eval(tuple(float(v) for v in x))])

    def taylor(self, x, degree: int = DEFAULT_DEGREE) -> Taylor:
        x = np.asarray(x, dtype=float)
        if np.any(x <= self.lower) or np.any(x >= self.upper):
            raise PointOutsideDomain(f"{x} is not inside {self.domain}")
        variables = Taylor.variables(x, degree)
        comps = list(self.eval(tuple(variables)))
        if len(comps) != AMBIENT_DIM[self.c]:
            raise SurfaceModelMismatch(f"{self.name}: chart returns {len(comps)} components for c={self.c}")
        comps = [c if isinstance(c, Taylor) else Taylor.constant(c, variables[0].basis, degree) for c in comps]
        return Taylor.stack(comps)


def _det(rows: list[list]) -> Taylor:
    m = len(rows)
    out = None
    for perm in permutations(range(m)):
        sign = np.linalg.det(np.eye(m)[list(perm)])
        term = rows[0][perm[0]]
        for i in range(1, m):
            term = term * rows[i][perm[i]]
        term = term * float(round(sign))
        out = term if out is None else out + term
    return out


def cofactor_normal(vectors: list[Taylor]) -> Taylor:
    """Unit vector N with ``det[v_1, ..., v_{m-1}, N] > 0`` (Taylor fields)."""
    m = vectors[0].shape[0]
    comps = []
    for a in range(m):
        keep = [b for b in range(m) if b != a]
        rows = [[vectors[j][b] for j in range(m - 1)] for b in keep]
        comps.append(_det(rows) * float((-1) ** (a + m - 1)))
    nu = Taylor.stack(comps)
    return nu * T.reciprocal(T.sqrt(T.einsum("a,a->", nu, nu)))


@dataclass
class SurfaceField:
    """Taylor fields of the intrinsic and extrinsic geometry in the model metric."""

    surface: SurfaceSpec
    point: np.ndarray
    F: Taylor
    g: Taylor
    A: Taylor
    H: Taylor
    K: Taylor  # c + det A (Gauss equation)
    normal_euclid: Taylor

    @property
    def c(self) -> int:
        return self.surface.c

    def principal_curvatures(self) -> np.ndarray:
        E = orthonormal_frame(self.g.value)
        Af = np.linalg.solve(E, self.A.value @ E)
        return np.linalg.eigvalsh(0.5 * (Af + Af.T))

    def intrinsic_curvature(self) -> float:
        """Gauss curvature from the metric alone."""
        R = riemann(christoffel(self.g)).value
        g = self.g.value
        R_lower = np.einsum("ae,ebcd->abcd", g, R)
        return float(R_lower[0, 1, 0, 1] / np.linalg.det(g))


def surface_field(surface: SurfaceSpec, x, degree: int = DEFAULT_DEGREE) -> SurfaceField:
    F = surface.taylor(x, degree)
    dF = F.grad()
    Fu, Fv = dF[:, 0], dF[:, 1]
    d2F = dF.grad()
    gE = T.einsum("ai,aj->ij", dF, dF)
    if surface.c == 1:
        NE = cofactor_normal([Fu, Fv, F])
        g = gE
        h = T.einsum("aij,a->ij", d2F, NE)
    elif surface.c == 0:
        NE = cofactor_normal([Fu, Fv])
        g = gE
        h = T.einsum("aij,a->ij", d2F, NE)
    else:
        z3 = F[2]
        if z3.value <= 0:
            raise SurfaceModelMismatch("upper half-space chart left z3 > 0")
        NE = cofactor_normal([Fu, Fv])
        inv_z3 = T.reciprocal(z3)
        g = gE * (inv_z3 * inv_z3)
        # Levi-Civita of |dz|^2/z3^2 contributes the gE * N_E3 / z3 term.
        h = (T.einsum("aij,a->ij", d2F, NE) + gE * (NE[2] * inv_z3)) * inv_z3
    A = T.inv(g) @ h
    H = T.trace(A) * 0.5
    detA = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    K = detA + float(surface.c)
    return SurfaceField(surface=surface, point=np.asarray(x, float), F=F, g=g, A=A, H=H, K=K, normal_euclid=NE)


def mu_squared(sf: SurfaceField, n: int) -> Taylor:
    """Radicand ``4 H_g^2 - 2n/(n-1) (K_g - c)`` as a Taylor field."""
    return sf.H * sf.H * 4.0 - (sf.K - float(sf.c)) * (2.0 * n / (n - 1.0))


@dataclass(frozen=True)
class CondMResult:
    mu: float
    K: float
    residual_i: float
    residual_ii: float


def cond_m_residuals(sf: SurfaceField, n: int) -> CondMResult:
    """Residuals of ``|grad mu^-1|^2 + K mu^-2 = 0`` and ``Hess mu^-1 + K mu^-1 ds^2 = 0``."""
    m2 = mu_squared(sf, n)
    if m2.value <= 0:
        raise NonRealMu(f"4H^2 - 2n/(n-1)(K - c) = {m2.value:.3e} at {sf.point}")
    minv = T.power(m2, -0.5)
    d = minv.grad()
    Gamma = christoffel(sf.g)
    hess = d.grad().value - np.einsum("kij,k->ij", Gamma.value, d.value)
    g = sf.g.value
    dv = d.value
    K = sf.K.value
    m = minv.value
    res_i = abs(float(dv @ np.linalg.solve(g, dv) + K * m * m))
    E = orthonormal_frame(g)
    res_ii = float(np.linalg.norm(E.T @ (hess + K * m * g) @ E))
    return CondMResult(mu=float(1.0 / m), K=float(K), residual_i=res_i, residual_ii=res_ii)
