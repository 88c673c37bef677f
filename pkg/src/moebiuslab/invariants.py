"""Classical and Moebius invariants of a hypersurface at a point.

Everything up to the Blaschke tensor and the Moebius form is carried as a
truncated Taylor field around the base point (see :class:`MoebiusField`), so
Christoffel symbols, covariant derivatives and curvature of the Moebius
metric ``g* = rho^2 g`` come from exact polynomial differentiation rather
than nested finite differences.

Conventions
-----------
* ``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]`` and
  ``R[a, b, c, d]`` is the component ``dx^a(R(d_c, d_d) d_b)``.
* ``(X ^ Y) Z = <Y, Z> X - <X, Z> Y`` for the wedge endomorphism.
* ``d omega(X, Y) = X omega(Y) - Y omega(X) - omega([X, Y])``.
* The unit normal is oriented so that ``det[d_1 f, ..., d_n f, N] > 0``,
  times an optional ``normal_sign``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import taylor as T
from .errors import RankDeficient, UmbilicPoint
from .jets import Jet
from .taylor import Taylor

UMBILIC_REL = 1e-10


def umbilic_threshold(alpha_norm2: float) -> float:
    return UMBILIC_REL * max(alpha_norm2, 1.0)


@dataclass(frozen=True)
class ClassicalData:
    """First and second fundamental forms at a point (coordinate frame)."""

    g: np.ndarray
    N: np.ndarray
    h: np.ndarray
    A: np.ndarray
    H: float
    alpha_norm2: float

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def principal_curvatures(self) -> np.ndarray:
        E = orthonormal_frame(self.g)
        Af = np.linalg.solve(E, self.A @ E)
        return np.linalg.eigvalsh(0.5 * (Af + Af.T))


@dataclass
class MoebiusField:
    """Taylor fields of the classical and Moebius quantities around ``point``.

    Orders (with the default degree-5 immersion polynomial): ``rho``, ``B``
    and ``gs`` are exact to degree 3, ``Gamma`` and ``omega`` to degree 2,
    ``psi`` to degree 1.
    """

    point: np.ndarray
    n: int
    F: Taylor
    dF: Taylor
    g: Taylor
    ginv: Taylor
    N: Taylor
    h: Taylor
    A: Taylor
    H: Taylor
    alpha_norm2: Taylor
    rho: Taylor
    gs: Taylor
    gsinv: Taylor
    Gamma: Taylor
    B: Taylor
    drho: Taylor
    dH: Taylor
    psi: Taylor
    omega: Taylor
    normal_sign: int = 1
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def frame(self) -> np.ndarray:
        """g*-orthonormal frame (columns) from Gram-Schmidt on the coordinate basis."""
        if "frame" not in self._cache:
            self._cache["frame"] = orthonormal_frame(self.gs.value)
        return self._cache["frame"]

    def classical(self) -> ClassicalData:
        return ClassicalData(
            g=self.g.value,
            N=self.N.value,
            h=self.h.value,
            A=self.A.value,
            H=self.H.value,
            alpha_norm2=self.alpha_norm2.value,
        )


def orthonormal_frame(metric: np.ndarray) -> np.ndarray:
    """Columns ``E`` with ``E.T @ metric @ E = I``; Gram-Schmidt in coordinate order."""
    L = np.linalg.cholesky(0.5 * (metric + metric.T))
    return np.linalg.inv(L).T


def christoffel(metric: Taylor, metric_inv: Taylor | None = None) -> Taylor:
    """Christoffel symbols ``Gamma[k, i, j]`` of a Taylor metric field."""
    if metric_inv is None:
        metric_inv = T.inv(metric)
    d = metric.grad()  # d[i, j, l] = d_l g_ij
    c = d.coef
    term = Taylor(
        np.einsum("ljiZ->lijZ", c) + np.einsum("lijZ->lijZ", c) - np.einsum("ijlZ->lijZ", c),
        metric.basis,
    )
    return T.einsum("kl,lij->kij", metric_inv, term) * 0.5


def riemann(Gamma: Taylor) -> Taylor:
    """``R[a, b, c, d]`` from a Taylor Christoffel field."""
    dG = Gamma.grad()  # dG[a, i, j, l] = d_l Gamma^a_ij
    c = dG.coef
    lin = Taylor(np.einsum("adbcZ->abcdZ", c) - np.einsum("acbdZ->abcdZ", c), Gamma.basis)
    quad = T.einsum("ace,edb->abcd", Gamma, Gamma) - T.einsum("ade,ecb->abcd", Gamma, Gamma)
    return lin + quad


def _unit_normal(dF: Taylor, ginv: Taylor, normal_sign: int) -> Taylor:
    d0 = dF.value
    proj = d0 @ ginv.value @ d0.T
    a = int(np.argmin(np.diag(proj)))
    # nu = e_a - dF g^{-1} dF^T e_a
    coeff = T.einsum("ij,j->i", ginv, dF[a])
    nu = -T.einsum("bi,i->b", dF, coeff) + np.eye(dF.shape[0])[a]
    N = nu * T.reciprocal(T.sqrt(T.einsum("b,b->", nu, nu)))
    s = np.sign(np.linalg.det(np.column_stack([d0, N.value])))
    if s == 0:
        raise RankDeficient("normal construction degenerated")
    return N * float(s * normal_sign)


def moebius_field(jet: Jet, normal_sign: int = 1) -> MoebiusField:
    """Build all Taylor fields needed downstream from an exact jet."""
    F = jet.taylor
    if F is None:
        raise ValueError("moebius_field needs a Taylor-mode jet (evaluate_jet)")
    n = jet.n
    if F.order < 4:
        raise ValueError("need an immersion polynomial of degree >= 4")
    dF = F.grad()  # (n+1, n)
    g = T.einsum("ai,aj->ij", dF, dF)
    ginv = T.inv(g)
    N = _unit_normal(dF, ginv, normal_sign)
    d2F = dF.grad()  # (n+1, n, n)
    h = T.einsum("aij,a->ij", d2F, N)
    A = ginv @ h
    H = T.trace(A) * (1.0 / n)
    alpha_norm2 = T.einsum("ij,ji->", A, A)
    rho2 = (alpha_norm2 - H * H * n) * (n / (n - 1.0))
    if rho2.value <= umbilic_threshold(alpha_norm2.value):
        raise UmbilicPoint(f"rho^2 = {rho2.value:.3e} at {jet.point}")
    rho = T.sqrt(rho2)
    rho_inv = T.reciprocal(rho)
    gs = g * rho2
    gsinv = ginv * T.reciprocal(rho2)
    Gamma = christoffel(gs, gsinv)
    ident = np.eye(n)
    B = (A - H * ident) * rho_inv

    drho = rho.grad()
    dH = H.grad()
    grad_rho = T.einsum("ij,j->i", gsinv, drho)
    grad_rho_sq = T.einsum("i,i->", drho, grad_rho)
    hess_rho = drho.grad() - T.einsum("kij,k->ij", Gamma, drho)
    nabla_grad_rho = gsinv @ hess_rho
    psi = (
        B * (H * rho_inv)
        + ident * ((grad_rho_sq + H * H) * T.reciprocal(rho2) * 0.5)
        - nabla_grad_rho * rho_inv
    )
    # <B grad* rho, X>* = B^m_j d_m rho since B is g*-self-adjoint
    omega = -(dH + T.einsum("mj,m->j", B, drho)) * rho_inv

    return MoebiusField(
        point=jet.point,
        n=n,
        F=F,
        dF=dF,
        g=g,
        ginv=ginv,
        N=N,
        h=h,
        A=A,
        H=H,
        alpha_norm2=alpha_norm2,
        rho=rho,
        gs=gs,
        gsinv=gsinv,
        Gamma=Gamma,
        B=B,
        drho=drho,
        dH=dH,
        psi=psi,
        omega=omega,
        normal_sign=normal_sign,
    )


# -- pointwise operations ---------------------------------------------------


def classical_data(jet: Jet) -> ClassicalData:
    """g, unit normal, second fundamental form, shape operator and mean curvature."""
    d1, d2 = jet.derivative(1), jet.derivative(2)
    n = jet.n
    g = d1.T @ d1
    if np.linalg.matrix_rank(d1) < n:
        raise RankDeficient(f"df has rank < {n} at {jet.point}")
    N = _generalized_cross(d1)
    h = np.einsum("aij,a->ij", d2, N)
    A = np.linalg.solve(g, h)
    H = float(np.trace(A)) / n
    ginv = np.linalg.inv(g)
    alpha_norm2 = float(np.einsum("ik,jl,ij,kl->", ginv, ginv, h, h))
    return ClassicalData(g=g, N=N, h=h, A=A, H=H, alpha_norm2=alpha_norm2)


def _generalized_cross(d1: np.ndarray) -> np.ndarray:
    """Unit vector orthogonal to the columns of ``d1``, det[d1, N] > 0."""
    m = d1.shape[0]
    v = np.empty(m)
    for a in range(m):
        minor = np.delete(d1, a, axis=0)
        v[a] = (-1) ** (a + m - 1) * np.linalg.det(minor)
    return v / np.linalg.norm(v)


def rho(cd: ClassicalData, n: int | None = None) -> float:
    """Moebius conformal factor ``rho = sqrt(n/(n-1) (|alpha|^2 - n H^2))``."""
    n = cd.n if n is None else n
    rho2 = n / (n - 1.0) * (cd.alpha_norm2 - n * cd.H**2)
    if rho2 <= umbilic_threshold(cd.alpha_norm2):
        raise UmbilicPoint(f"rho^2 = {rho2:.3e} is below the umbilic threshold")
    return float(np.sqrt(rho2))


def moebius_shape_operator(cd: ClassicalData, rho_value: float):
    """Return ``(B, lambda_bar, frame)``.

    ``lambda_bar`` is sorted ascending and ``frame`` holds g-orthonormal
    eigenvectors (columns, coordinate components).
    """
    if rho_value <= 0:
        raise UmbilicPoint("rho must be positive")
    n = cd.n
    B = (cd.A - cd.H * np.eye(n)) / rho_value
    E = orthonormal_frame(cd.g)
    Bf = np.linalg.solve(E, B @ E)
    lam, V = np.linalg.eigh(0.5 * (Bf + Bf.T))
    return B, lam, E @ V


def blaschke_tensor(mf: MoebiusField) -> np.ndarray:
    """Blaschke endomorphism at the base point (coordinate frame)."""
    return mf.psi.value


def moebius_form(mf: MoebiusField) -> np.ndarray:
    """Moebius form components ``omega_j`` at the base point."""
    return mf.omega.value


def _riemann_field(mf: MoebiusField) -> Taylor:
    if "R" not in mf._cache:
        mf._cache["R"] = riemann(mf.Gamma)
    return mf._cache["R"]


@dataclass(frozen=True)
class MoebiusCurvature:
    R: np.ndarray  # (1,3) components R[a, b, c, d]
    R_lower: np.ndarray  # <R(d_c, d_d) d_b, d_a>*
    s_star: float
    gs: np.ndarray

    def sectional(self, X, Y) -> float:
        X = np.asarray(X, float)
        Y = np.asarray(Y, float)
        num = np.einsum("abcd,a,b,c,d->", self.R_lower, X, Y, X, Y)
        den = (X @ self.gs @ X) * (Y @ self.gs @ Y) - (X @ self.gs @ Y) ** 2
        return float(num / den)


def moebius_curvature(mf: MoebiusField) -> MoebiusCurvature:
    """Curvature tensor and normalized scalar curvature of the Moebius metric."""
    R = _riemann_field(mf).value
    gs = mf.gs.value
    R_lower = np.einsum("ae,ebcd->abcd", gs, R)
    E = mf.frame
    Rf = np.einsum("abcd,ai,bj,ck,dl->ijkl", R_lower, E, E, E, E)
    n = mf.n
    total = np.einsum("ijij->", Rf)
    return MoebiusCurvature(R=R, R_lower=R_lower, s_star=float(total / (n * (n - 1))), gs=gs)


def to_frame_11(M: np.ndarray, E: np.ndarray) -> np.ndarray:
    return np.linalg.solve(E, M @ E)


def conformal_gauss_residual(mf: MoebiusField) -> float:
    """Frobenius norm (g*-orthonormal frame) of R* - (B^B + psi^I + I^psi)."""
    curv = moebius_curvature(mf)
    E = mf.frame
    Rf = np.einsum("abcd,ai,bj,ck,dl->ijkl", curv.R_lower, E, E, E, E)
    Bf = to_frame_11(mf.B.value, E)
    Pf = to_frame_11(mf.psi.value, E)
    d = np.eye(mf.n)
    rhs = (
        np.einsum("bd,ac->abcd", Bf, Bf)
        - np.einsum("bc,ad->abcd", Bf, Bf)
        + np.einsum("db,ac->abcd", d, Pf)
        - np.einsum("bc,da->abcd", Pf, d)
        + np.einsum("bd,ca->abcd", Pf, d)
        - np.einsum("cb,ad->abcd", d, Pf)
    )
    return float(np.linalg.norm(Rf - rhs))


def _covariant_11(T11: Taylor, Gamma: Taylor) -> np.ndarray:
    """``nabla[i, k, j] = (nabla_i T)^k_j`` at the base point."""
    dT = T11.grad().value  # dT[k, j, i]
    G = Gamma.value
    t = T11.value
    return (
        np.einsum("kji->ikj", dT)
        + np.einsum("kil,lj->ikj", G, t)
        - np.einsum("lij,kl->ikj", G, t)
    )


def _frame_residual_12(C: np.ndarray, E: np.ndarray) -> float:
    Cf = np.einsum("ck,kij,ia,jb->cab", np.linalg.inv(E), C, E, E)
    return float(np.linalg.norm(Cf))


def conformal_codazzi_residual(mf: MoebiusField) -> tuple[float, float]:
    """Residual norms of both conformal Codazzi equations (B and psi)."""
    n = mf.n
    d = np.eye(n)
    w = mf.omega.value
    Bv = mf.B.value
    nB = _covariant_11(mf.B, mf.Gamma)
    CB = (
        np.einsum("ikj->kij", nB)
        - np.einsum("jki->kij", nB)
        - (np.einsum("i,kj->kij", w, d) - np.einsum("j,ki->kij", w, d))
    )
    nP = _covariant_11(mf.psi, mf.Gamma)
    CP = (
        np.einsum("ikj->kij", nP)
        - np.einsum("jki->kij", nP)
        - (np.einsum("j,ki->kij", w, Bv) - np.einsum("i,kj->kij", w, Bv))
    )
    E = mf.frame
    return _frame_residual_12(CB, E), _frame_residual_12(CP, E)


def exterior_derivative_omega(mf: MoebiusField) -> np.ndarray:
    """``dw[i, j] = d_i omega_j - d_j omega_i`` at the base point."""
    dw = mf.omega.grad().value  # dw[j, i] = d_i omega_j
    return dw.T - dw


def conformal_ricci_residual(mf: MoebiusField) -> float:
    """Norm of d omega(X, Y) - <[B, psi] X, Y>* in a g*-orthonormal frame.

    With ``d omega(X, Y) = X omega(Y) - Y omega(X)`` and the sign of omega
    used here, the commutator enters as ``B psi - psi B``.
    """
    dw = exterior_derivative_omega(mf)
    P, Bv, gs = mf.psi.value, mf.B.value, mf.gs.value
    comm = Bv @ P - P @ Bv
    rhs = np.einsum("jk,ki->ij", gs, comm)
    E = mf.frame
    return float(np.linalg.norm(E.T @ (dw - rhs) @ E))


def bianchi_residual(mf: MoebiusField) -> float:
    R = moebius_curvature(mf).R
    cyc = R + np.einsum("abcd->acdb", R) + np.einsum("abcd->adbc", R)
    return float(np.max(np.abs(cyc)) / max(np.max(np.abs(R)), 1.0))


@dataclass(frozen=True)
class MoebiusData:
    """All pointwise Moebius invariants.

    Matrices are coordinate-frame components; ``eigenframe`` columns are
    g*-orthonormal eigenvectors of ``B`` matching ``lambda_bar`` (ascending),
    and ``theta[i]`` is the Blaschke diagonal entry on ``eigenframe[:, i]``.
    """

    point: np.ndarray
    n: int
    rho: float
    H: float
    B: np.ndarray
    lambda_bar: np.ndarray
    eigenframe: np.ndarray
    psi: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    s_star: float
    R_star: np.ndarray
    gs: np.ndarray
    commutator: float  # ||[psi, B]|| / (||psi|| ||B||) in an orthonormal frame
    principal_curvatures: np.ndarray

    @property
    def trace_psi(self) -> float:
        return float(np.trace(self.psi))


COMMUTATOR_TOL = 1e-7


def moebius_data(mf: MoebiusField) -> MoebiusData:
    E = mf.frame
    Bf = to_frame_11(mf.B.value, E)
    Pf = to_frame_11(mf.psi.value, E)
    lam, V = np.linalg.eigh(0.5 * (Bf + Bf.T))
    Ps = 0.5 * (Pf + Pf.T)
    theta = np.einsum("ai,ab,bi->i", V, Ps, V)
    comm = np.linalg.norm(Pf @ Bf - Bf @ Pf) / max(np.linalg.norm(Pf) * np.linalg.norm(Bf), 1e-300)
    curv = moebius_curvature(mf)
    cd = mf.classical()
    return MoebiusData(
        point=mf.point,
        n=mf.n,
        rho=mf.rho.value,
        H=mf.H.value,
        B=mf.B.value,
        lambda_bar=lam,
        eigenframe=E @ V,
        psi=mf.psi.value,
        theta=theta,
        omega=mf.omega.value,
        s_star=curv.s_star,
        R_star=curv.R,
        gs=curv.gs,
        commutator=float(comm),
        principal_curvatures=cd.principal_curvatures(),
    )


@dataclass(frozen=True)
class StructureResiduals:
    """Residuals of the identities and structure equations at one point."""

    trace_B: float
    norm_B: float
    trace_psi: float
    gauss: float
    codazzi_B: float
    codazzi_psi: float
    ricci: float
    bianchi: float

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


def structure_residuals(mf: MoebiusField) -> StructureResiduals:
    n = mf.n
    Bv = mf.B.value
    curv = moebius_curvature(mf)
    cb, cp = conformal_codazzi_residual(mf)
    return StructureResiduals(
        trace_B=abs(float(np.trace(Bv))),
        norm_B=abs(float(np.trace(Bv @ Bv)) - (n - 1) / n),
        trace_psi=abs(float(np.trace(mf.psi.value)) - (n * n * curv.s_star + 1) / (2 * n)),
        gauss=conformal_gauss_residual(mf),
        codazzi_B=cb,
        codazzi_psi=cp,
        ricci=conformal_ricci_residual(mf),
        bianchi=bianchi_residual(mf),
    )


def sectional_from_data(md: MoebiusData) -> Callable[[np.ndarray, np.ndarray], float]:
    R_lower = np.einsum("ae,ebcd->abcd", md.gs, md.R_star)
    curv = MoebiusCurvature(R=md.R_star, R_lower=R_lower, s_star=md.s_star, gs=md.gs)
    return curv.sectional
