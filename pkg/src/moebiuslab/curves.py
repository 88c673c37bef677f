"""Unit-speed curves with prescribed curvature in the 2-dimensional space forms.

A curve in Q^2_c is carried by its Frenet frame ``F = [gamma; T; N]`` (rows)
which satisfies the linear system ``F' = K(s) F`` with

    K = [[0, 1, 0], [-c, 0, kappa], [0, -kappa, 0]].

For ``c = 0`` the rows live in R^2, for ``c = 1`` on S^2 in R^3 and for
``c = -1`` on the hyperboloid model in Minkowski space R^{1,2}; the latter is
mapped to the upper half-plane for use in rotational constructions.

The trajectory is integrated once with a fixed-step RK4 scheme.  Jets at a
parameter value come from the Taylor recurrence of the same linear system,
started from the integrated state, so curve-based charts stay compatible with
the Taylor-mode jet engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import taylor as T
from .errors import IntegratorStepTooLarge, ParamOutOfRange
from .taylor import Taylor

STEP_ERROR_TOL = 1e-10
SERIES_DEGREE = 8


def _law_exp(a: float, b: float):
    return lambda s: b * T.exp(s * a)


def _law_sqrt(c: float, b: float):
    return lambda s: T.power(s * c + b, -0.5)


def _law_const(k: float):
    return lambda s: s * 0.0 + k


@dataclass(frozen=True)
class CurveSpec:
    """Prescribed-curvature curve on ``[s0, s1]`` in Q^2_c.

    ``law`` is ``"exp"`` (kappa = b e^{a s}), ``"sqrt"``
    (kappa = 1/sqrt(c s + b), parameters ``a`` playing the role of c) or
    ``"const"`` (kappa = b).  ``theta0`` rotates the initial tangent.
    """

    name: str
    c: int
    law: str
    a: float
    b: float
    interval: tuple[float, float]
    theta0: float = 0.0
    step: float = 1e-3

    def __post_init__(self):
        if self.c not in (0, 1, -1):
            raise ParamOutOfRange(f"curve model curvature must be 0, 1 or -1, got {self.c}")
        if self.law not in ("exp", "sqrt", "const"):
            raise ParamOutOfRange(f"unknown curvature law {self.law!r}")
        s0, s1 = self.interval
        if not s1 > s0:
            raise ParamOutOfRange("empty arclength interval")
        if self.b <= 0 or (self.law == "sqrt" and (self.a <= 0 or self.a * s0 + self.b <= 0)):
            raise ParamOutOfRange(f"curvature law {self.law} is not positive on {self.interval}")

    @property
    def kappa(self) -> Callable:
        if self.law == "exp":
            return _law_exp(self.a, self.b)
        if self.law == "sqrt":
            return _law_sqrt(self.a, self.b)
        return _law_const(self.b)

    def kappa_value(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.law == "exp":
            return self.b * np.exp(self.a * s)
        if self.law == "sqrt":
            return 1.0 / np.sqrt(self.a * s + self.b)
        return np.full_like(s, self.b)


def initial_frame(c: int, theta0: float) -> np.ndarray:
    ct, st = np.cos(theta0), np.sin(theta0)
    if c == 0:
        return np.array([[0.0, 0.0], [ct, st], [-st, ct]])
    if c == 1:
        return np.array([[0.0, 0.0, 1.0], [ct, st, 0.0], [-st, ct, 0.0]])
    return np.array([[1.0, 0.0, 0.0], [0.0, ct, st], [0.0, -st, ct]])


def _generator(c: int, kappa: float) -> np.ndarray:
    return np.array([[0.0, 1.0, 0.0], [-c, 0.0, kappa], [0.0, -kappa, 0.0]])


def _rk4_step(F: np.ndarray, s: float, h: float, kappa, c: int) -> np.ndarray:
    k1 = _generator(c, kappa(s)) @ F
    k2 = _generator(c, kappa(s + h / 2)) @ (F + h / 2 * k1)
    k3 = _generator(c, kappa(s + h / 2)) @ (F + h / 2 * k2)
    k4 = _generator(c, kappa(s + h)) @ (F + h * k3)
    return F + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass
class IntegratedCurve:
    spec: CurveSpec
    grid: np.ndarray
    states: np.ndarray  # (len(grid), 3, m)
    error_estimate: float
    _kappa_scalar: Callable = field(repr=False, default=None)

    def state(self, s: float) -> np.ndarray:
        s0, s1 = self.spec.interval
        if not s0 <= s <= s1:
            raise ParamOutOfRange(f"arclength {s} outside {self.spec.interval}")
        i = min(int(np.searchsorted(self.grid, s, side="right")) - 1, len(self.grid) - 1)
        i = max(i, 0)
        h = s - self.grid[i]
        if h == 0.0:
            return self.states[i].copy()
        return _rk4_step(self.states[i], self.grid[i], h, self._kappa_scalar, self.spec.c)

    def series(self, s: float, degree: int = SERIES_DEGREE) -> np.ndarray:
        """Taylor coefficients ``F_k`` of the frame at ``s``, shape ``(degree+1, 3, m)``."""
        var = Taylor.variables([s], degree)[0]
        kc = np.broadcast_to(self.spec.kappa(var).coef, (degree + 1,))
        c = self.spec.c
        Ks = np.zeros((degree + 1, 3, 3))
        Ks[0] = _generator(c, 0.0)
        Ks[:, 1, 2] += kc
        Ks[:, 2, 1] -= kc
        out = np.zeros((degree + 1,) + self.states.shape[1:])
        out[0] = self.state(s)
        for k in range(degree):
            acc = sum(Ks[j] @ out[k - j] for j in range(k + 1))
            out[k + 1] = acc / (k + 1)
        return out

    def frame(self, s):
        """Frame at ``s``; ``s`` may be a float, an array or a Taylor scalar."""
        if isinstance(s, Taylor):
            coeffs = self.series(s.value, max(s.order, 1))
            flat = coeffs.reshape(coeffs.shape[0], -1)
            comps = [T._compose(s, flat[:, j]) for j in range(flat.shape[1])]
            return np.array(comps, dtype=object).reshape(coeffs.shape[1:])
        s_arr = np.asarray(s, dtype=float)
        if s_arr.ndim == 0:
            return self.state(float(s_arr))
        return np.stack([self.state(float(v)) for v in s_arr.ravel()]).reshape(s_arr.shape + self.states.shape[1:])

    def gamma(self, s):
        F = self.frame(s)
        if isinstance(s, Taylor):
            return list(F[0])
        F = np.asarray(F)
        return [F[..., 0, j] for j in range(F.shape[-1])]

    def upper_half_plane(self, s):
        """Hyperboloid point mapped to (z1, z2), z2 > 0; only for ``c = -1``."""
        if self.spec.c != -1:
            raise ParamOutOfRange("upper half-plane map needs a hyperbolic curve")
        x0, x1, x2 = self.gamma(s)
        d = x0 - x2
        inv = T.reciprocal(d)
        return x1 * inv, inv


def integrate(spec: CurveSpec) -> IntegratedCurve:
    """Fixed-step RK4 with a step-doubling error estimate at the far end."""
    s0, s1 = spec.interval
    steps = max(int(np.ceil((s1 - s0) / spec.step)), 1)
    grid = np.linspace(s0, s1, steps + 1)
    h = grid[1] - grid[0]
    kappa = lambda s: float(spec.kappa_value(s))
    F = initial_frame(spec.c, spec.theta0)
    states = np.empty((steps + 1,) + F.shape)
    states[0] = F
    fine = F.copy()
    for i in range(steps):
        states[i + 1] = _rk4_step(states[i], grid[i], h, kappa, spec.c)
        fine = _rk4_step(fine, grid[i], h / 2, kappa, spec.c)
        fine = _rk4_step(fine, grid[i] + h / 2, h / 2, kappa, spec.c)
    err = float(np.max(np.abs(states[-1] - fine)) / 15.0)
    if err > STEP_ERROR_TOL:
        raise IntegratorStepTooLarge(f"{spec.name}: local error estimate {err:.2e} exceeds {STEP_ERROR_TOL}")
    return IntegratedCurve(spec=spec, grid=grid, states=states, error_estimate=err, _kappa_scalar=kappa)
