"""Immersion specs and their derivative jets.

``evaluate_jet`` pushes Taylor variables through the chart map and reads the
partial derivatives off the resulting polynomials; ``evaluate_jet_fd`` is the
independent finite-difference oracle used by the tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import PointOutsideDomain, RankDeficient, StepTooLarge
from .taylor import DEFAULT_DEGREE, Taylor

# Relative smallest singular value of df below which the point is rejected.
RANK_TOL = 1e-10
DEFAULT_INSET = 0.05


@dataclass(frozen=True)
class ImmersionSpec:
    """A parametrized hypersurface ``eval: box in R^n -> R^(n+1)``.

    ``eval`` receives a tuple of ``n`` coordinates (Taylor objects, floats or
    numpy arrays) and returns ``n + 1`` components built from the functions in
    :mod:`moebiuslab.taylor`.
    """

    name: str
    n: int
    domain: tuple[tuple[float, float], ...]
    eval: Callable[[tuple], Sequence] = field(repr=False, compare=False)
    metadata: Mapping[str, object] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("intrinsic dimension must be at least 2")
        if len(self.domain) != self.n:
            raise ValueError(f"domain has {len(self.domain)} axes, expected {self.n}")
        object.__setattr__(self, "domain", tuple((float(a), float(b)) for a, b in self.domain))

    @property
    def lower(self) -> np.ndarray:
        return np.array([a for a, _ in self.domain])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b for _, b in self.domain])

    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        width = self.upper - self.lower
        return bool(np.all(x > self.lower + margin * width) and np.all(x < self.upper - margin * width))

    def position(self, x) -> np.ndarray:
        """Plain float evaluation of the chart map."""
        out = self.eval(tuple(float(v) for v in x))
        return np.array([float(c) for c in out])

    def with_eval(self, name: str, fn: Callable, **meta) -> ImmersionSpec:
        return ImmersionSpec(name, self.n, self.domain, fn, {**self.metadata, **meta})


def sample_points(spec: ImmersionSpec, count: int, seed: int, inset: float = DEFAULT_INSET) -> np.ndarray:
    """Seeded uniform samples from the inset box, shape ``(count, n)``."""
    rng = np.random.default_rng(seed)
    lo, hi = spec.lower, spec.upper
    w = hi - lo
    return rng.uniform(lo + inset * w, hi - inset * w, size=(count, spec.n))


@dataclass(frozen=True)
class Jet:
    """Position and symmetric partial-derivative tensors of an immersion.

    ``derivs[k - 1]`` has shape ``(n + 1,) + (n,) * k`` and holds the order-k
    partials.  ``taylor`` keeps the underlying truncated polynomial for the
    invariants module.
    """

    point: np.ndarray
    position: np.ndarray
    derivs: tuple[np.ndarray, ...]
    taylor: Taylor | None = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.point.shape[0]

    def derivative(self, k: int) -> np.ndarray:
        return self.derivs[k - 1]


def _check_point(spec: ImmersionSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.n,):
        raise PointOutsideDomain(f"point has shape {x.shape}, expected ({spec.n},)")
    if not spec.contains(x):
        raise PointOutsideDomain(f"{x} is not in the interior of {spec.domain}")
    return x


def _check_rank(d1: np.ndarray, x) -> None:
    s = np.linalg.svd(d1, compute_uv=False)
    if s[-1] <= RANK_TOL * max(s[0], 1e-300):
        raise RankDeficient(f"df has numerical rank < {d1.shape[1]} at {x}")


def _tensor_from_taylor(F: Taylor, k: int, n: int) -> np.ndarray:
    out = np.empty((F.shape[0],) + (n,) * k)
    for idx in itertools.product(range(n), repeat=k):
        alpha = np.bincount(np.array(idx, dtype=int), minlength=n)
        out[(slice(None),) + idx] = F.partial(alpha)
    return out


def immersion_taylor(spec: ImmersionSpec, x, degree: int = DEFAULT_DEGREE) -> Taylor:
    variables = Taylor.variables(np.asarray(x, dtype=float), degree)
    comps = list(spec.eval(tuple(variables)))
    if len(comps) != spec.n + 1:
        raise ValueError(f"{spec.name}: eval returned {len(comps)} components, expected {spec.n + 1}")
    comps = [c if isinstance(c, Taylor) else Taylor.constant(c, variables[0].basis, degree) for c in comps]
    return Taylor.stack(comps)


def evaluate_jet(spec: ImmersionSpec, x, degree: int = DEFAULT_DEGREE, max_order: int = 4) -> Jet:
    """Exact (Taylor-mode) jet of ``spec`` at ``x``.

    The underlying polynomial is kept to ``degree`` (default 5, one more than
    the tensors materialized here) so that the Codazzi equation of the
    Blaschke tensor can be checked without numerical differentiation.
    """
    x = _check_point(spec, x)
    F = immersion_taylor(spec, x, degree)
    derivs = tuple(_tensor_from_taylor(F, k, spec.n) for k in range(1, min(max_order, degree) + 1))
    _check_rank(derivs[0], x)
    return Jet(point=x, position=F.value, derivs=derivs, taylor=F)


# Central stencils of second-order accuracy: (offsets, weights) for step 1.
_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


def default_fd_step(spec: ImmersionSpec) -> float:
    """Step balancing truncation against round-off for fourth-order stencils."""
    return 5e-3 * float(np.min(spec.upper - spec.lower))


def evaluate_jet_fd(spec: ImmersionSpec, x, h: float | None = None, max_order: int = 4) -> Jet:
    """Finite-difference jet: central stencils at steps ``h`` and ``2h`` combined
    by one Richardson step, giving fourth-order accuracy for every partial."""
    x = _check_point(spec, x)
    if h is None:
        h = default_fd_step(spec)
    if h <= 0:
        raise ValueError("step must be positive")
    n = spec.n
    reach = 2 * 2 * h  # widest stencil offset at the coarse step
    if np.any(x - reach < spec.lower) or np.any(x + reach > spec.upper):
        raise StepTooLarge(f"stencil of reach {reach} leaves the domain at {x}")

    alphas = [a for k in range(1, max_order + 1) for a in _multi_indices(n, k)]
    plans = []
    offsets: dict[tuple[int, ...], int] = {(0,) * n: 0}
    for alpha in alphas:
        for scale in (1, 2):
            terms = []
            per_axis = [_STENCILS[a] for a in alpha]
            for combo in itertools.product(*[list(zip(*s)) for s in per_axis]):
                off = tuple(scale * o for o, _ in combo)
                w = float(np.prod([wt for _, wt in combo]))
                if off not in offsets:
                    offsets[off] = len(offsets)
                terms.append((offsets[off], w))
            plans.append((alpha, scale, terms))

    grid = np.array(list(offsets.keys()), dtype=float)
    pts = x[None, :] + h * grid
    comps = spec.eval(tuple(pts[:, i] for i in range(n)))
    values = np.stack([np.broadcast_to(np.asarray(c, dtype=float), (len(pts),)) for c in comps], axis=1)

    partial = {}
    for alpha, scale, terms in plans:
        idx = np.array([t[0] for t in terms])
        w = np.array([t[1] for t in terms])
        est = (w[:, None] * values[idx]).sum(axis=0) / (scale * h) ** sum(alpha)
        partial.setdefault(alpha, {})[scale] = est
    rich = {a: (4.0 * d[1] - d[2]) / 3.0 for a, d in partial.items()}

    derivs = []
    for k in range(1, max_order + 1):
        t = np.empty((n + 1,) + (n,) * k)
        for idx in itertools.product(range(n), repeat=k):
            alpha = tuple(np.bincount(np.array(idx, dtype=int), minlength=n))
            t[(slice(None),) + idx] = rich[alpha]
        derivs.append(t)
    _check_rank(derivs[0], x)
    return Jet(point=x, position=values[0], derivs=tuple(derivs))


def _multi_indices(n: int, k: int):
    for combo in itertools.combinations_with_replacement(range(n), k):
        yield tuple(int(c) for c in np.bincount(np.array(combo, dtype=int), minlength=n))


def jet_relative_error(a: Jet, b: Jet) -> list[float]:
    """Per-order max-norm discrepancy, scaled by ``max(|a|_max, 1)``."""
    out = []
    for ta, tb in zip(a.derivs, b.derivs):
        out.append(float(np.max(np.abs(ta - tb)) / max(np.max(np.abs(ta)), 1.0)))
    return out
