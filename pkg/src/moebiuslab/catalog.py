"""Example hypersurfaces addressable by name.

Names follow ``entry?key=value&key=value``; omitted keys take their defaults,
unknown keys are rejected.  ``list_entries()`` gives the stable listing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Mapping
from urllib.parse import parse_qsl

import numpy as np

from . import taylor as T
from .curves import CurveSpec, IntegratedCurve, integrate
from .errors import ParamOutOfRange, SpecFileError, SurfaceModelMismatch, UnknownCatalogEntry
from .jets import ImmersionSpec
from .surfaces import SurfaceSpec

TWO_PI = 2.0 * np.pi
UNIT = (-1.0, 1.0)


# -- sphere charts ----------------------------------------------------------


def sphere_chart(w) -> list:
    """Inverse stereographic projection R^k -> S^k in R^(k+1)."""
    sq = sum(wi * wi for wi in w)
    inv = T.reciprocal(sq + 1.0)
    return [2.0 * wi * inv for wi in w] + [(sq - 1.0) * inv]


def _sphere_arg(w):
    return list(w)


# -- surfaces in the space forms -------------------------------------------


def clifford_torus(r: float) -> SurfaceSpec:
    """S^1(r) x S^1(sqrt(1 - r^2)) in S^3."""
    if not 0.0 < r < 1.0:
        raise ParamOutOfRange(f"Clifford torus radius must lie in (0, 1), got {r}")
    s = float(np.sqrt(1.0 - r * r))

    def ev(x):
        u, v = x
        return (r * T.cos(u), r * T.sin(u), s * T.cos(v), s * T.sin(v))

    return SurfaceSpec("clifford-torus", 1, ((0.0, TWO_PI), (0.0, TWO_PI)), ev, {"r": r})


def stretched_clifford_torus(r: float, ratio: float, axis: int = 0) -> SurfaceSpec:
    """Clifford torus stretched along one axis of R^4 and pushed back to S^3."""
    base = clifford_torus(r)
    scale = np.ones(4)
    scale[axis] = ratio

    def ev(x):
        p = [scale[i] * c for i, c in enumerate(base.eval(x))]
        inv = T.reciprocal(T.sqrt(sum(c * c for c in p)))
        return tuple(c * inv for c in p)

    return SurfaceSpec("stretched-clifford-torus", 1, base.domain, ev, {"r": r, "ratio": ratio})


def hyperbolic_cylinder(r: float) -> SurfaceSpec:
    """Equidistant tube S^1(r) x H^1(sqrt(1 + r^2)) around the z3-axis of the upper half-space.

    Points at hyperbolic distance ``d = asinh(r)`` from the geodesic; the
    principal curvatures are ``tanh d`` and ``coth d``.
    """
    if not r > 0:
        raise ParamOutOfRange(f"hyperbolic cylinder radius must be positive, got {r}")
    d = float(np.arcsinh(r))
    th, sh = float(np.tanh(d)), float(1.0 / np.cosh(d))

    def ev(x):
        s, phi = x
        e = T.exp(s)
        return (e * th * T.cos(phi), e * th * T.sin(phi), e * sh)

    return SurfaceSpec("hyperbolic-cylinder", -1, ((-1.0, 1.0), (0.0, TWO_PI)), ev, {"r": r})


def torus_of_revolution(R: float = 2.0, a: float = 0.7) -> SurfaceSpec:
    def ev(x):
        u, v = x
        w = R + a * T.cos(v)
        return (w * T.cos(u), w * T.sin(u), a * T.sin(v))

    return SurfaceSpec("torus-of-revolution", 0, ((0.0, TWO_PI), (0.3, 2.8)), ev, {"R": R, "a": a})


def uhs_graph_surface() -> SurfaceSpec:
    """A generic surface in the upper half-space (negative control for rotations)."""

    def ev(x):
        u, v = x
        return (u, v, 1.5 + 0.3 * u * u - 0.2 * v * v + 0.1 * u * v + 0.15 * T.sin(u + 2.0 * v))

    return SurfaceSpec("uhs-graph", -1, ((-0.8, 0.8), (-0.8, 0.8)), ev, {})


# -- the three constructions ------------------------------------------------


def make_cylinder(g: SurfaceSpec, n: int, name: str | None = None, **meta) -> ImmersionSpec:
    """``(g(x), y)`` with ``y`` in R^(n-2)."""
    if g.c != 0:
        raise SurfaceModelMismatch("the cylinder construction needs a surface in R^3")
    if n < 3:
        raise ParamOutOfRange("cylinder needs n >= 3")

    def ev(x):
        return tuple(g.eval(x[:2])) + tuple(x[2:])

    meta = {"construction": "cylinder", "surface": g.name, "conformal_factor": "1", **meta}
    return ImmersionSpec(name or f"cylinder[{g.name}]", n, g.domain + (UNIT,) * (n - 2), ev, meta)


def make_cone(g: SurfaceSpec, n: int, t_range=(0.5, 2.0), name: str | None = None, **meta) -> ImmersionSpec:
    """``(t g(x), y)`` with ``t > 0`` and ``y`` in R^(n-3)."""
    if g.c != 1:
        raise SurfaceModelMismatch("the cone construction needs a surface in S^3")
    if n < 3:
        raise ParamOutOfRange("cone needs n >= 3")
    if t_range[0] <= 0:
        raise ParamOutOfRange("cone parameter t must stay positive")

    def ev(x):
        t = x[2]
        return tuple(t * c for c in g.eval(x[:2])) + tuple(x[3:])

    meta = {"construction": "cone", "surface": g.name, "conformal_factor": "t", **meta}
    return ImmersionSpec(name or f"cone[{g.name}]", n, g.domain + (tuple(t_range),) + (UNIT,) * (n - 3), ev, meta)


def make_rotational(g: SurfaceSpec, n: int, name: str | None = None, **meta) -> ImmersionSpec:
    """``(z1, z2, z3 Y(w))`` with ``Y`` a chart of S^(n-2)."""
    if g.c != -1:
        raise SurfaceModelMismatch("the rotational construction needs a surface in the upper half-space")
    if n < 3:
        raise ParamOutOfRange("rotational construction needs n >= 3")

    def ev(x):
        z1, z2, z3 = g.eval(x[:2])
        return (z1, z2) + tuple(z3 * c for c in sphere_chart(x[2:]))

    meta = {"construction": "rotational", "surface": g.name, "conformal_factor": "z3", **meta}
    return ImmersionSpec(name or f"rotational[{g.name}]", n, g.domain + (UNIT,) * (n - 2), ev, meta)


# -- standard products ------------------------------------------------------


def _stereo_from_last_pole(X: list) -> list:
    inv = T.reciprocal(1.0 - X[-1])
    return [c * inv for c in X[:-1]]


def standard_products(k: int, n: int, kind: str, r: float | None = None) -> ImmersionSpec:
    """S^k x R^(n-k) cylinder, S^k x H^(n-k) cone or S^k x S^(n-k) torus in R^(n+1)."""
    if not 1 <= k <= n - 1:
        raise ParamOutOfRange(f"need 1 <= k <= n-1, got k={k}, n={n}")
    if kind == "cylinder":

        def ev(x):
            return tuple(sphere_chart(x[:k])) + tuple(x[k:])

        return ImmersionSpec(f"cylinder?k={k}&n={n}", n, (UNIT,) * n, ev, {"kind": kind, "k": k})
    r = float(np.sqrt(0.5) if r is None else r)
    if not 0.0 < r < 1.0:
        raise ParamOutOfRange(f"radius must lie in (0, 1), got {r}")
    s = float(np.sqrt(1.0 - r * r))
    if kind == "cone":

        def ev(x):
            t = x[k]
            return tuple(t * r * c for c in sphere_chart(x[:k])) + (t * s,) + tuple(x[k + 1 :])

        dom = (UNIT,) * k + ((0.5, 2.0),) + (UNIT,) * (n - k - 1)
        return ImmersionSpec(f"cone?k={k}&n={n}&r={r:g}", n, dom, ev, {"kind": kind, "k": k, "r": r})
    if kind == "torus":

        def ev(x):
            X = [r * c for c in sphere_chart(x[:k])] + [s * c for c in sphere_chart(x[k:])]
            return tuple(_stereo_from_last_pole(X))

        return ImmersionSpec(f"torus?k={k}&n={n}&r={r:g}", n, (UNIT,) * n, ev, {"kind": kind, "k": k, "r": r})
    raise ParamOutOfRange(f"unknown product kind {kind!r}")


def cone_over_product(p: int, q: int, r: float, n: int) -> ImmersionSpec:
    """Cone over S^p(r) x S^q(sqrt(1-r^2)) in S^(p+q+1), times R^(n-p-q-1)."""
    if p < 1 or q < 1 or n < p + q + 1:
        raise ParamOutOfRange(f"need p, q >= 1 and n >= p+q+1, got p={p}, q={q}, n={n}")
    if not 0.0 < r < 1.0:
        raise ParamOutOfRange(f"radius must lie in (0, 1), got {r}")
    s = float(np.sqrt(1.0 - r * r))

    def ev(x):
        t = x[p + q]
        head = [r * c for c in sphere_chart(x[:p])] + [s * c for c in sphere_chart(x[p : p + q])]
        return tuple(t * c for c in head) + tuple(x[p + q + 1 :])

    dom = (UNIT,) * (p + q) + ((0.5, 2.0),) + (UNIT,) * (n - p - q - 1)
    return ImmersionSpec(f"cone-product?p={p}&q={q}&r={r:g}&n={n}", n, dom, ev, {"p": p, "q": q, "r": r})


# -- curve-based entries ----------------------------------------------------


@lru_cache(maxsize=64)
def integrated_curve(spec: CurveSpec) -> IntegratedCurve:
    return integrate(spec)


def curve_with_curvature(spec: CurveSpec) -> IntegratedCurve:
    """Integrate the Frenet system of ``spec`` (cached per spec)."""
    return integrated_curve(spec)


def _curve_cylinder(a: float, b: float, n: int, theta0: float = 0.0) -> ImmersionSpec:
    curve = curve_with_curvature(CurveSpec("spiral", 0, "exp", a, b, (-1.05, 1.55), theta0))

    def ev(x):
        return tuple(curve.gamma(x[0])) + tuple(x[1:])

    return ImmersionSpec(
        f"cyl-spiral?a={a:g}&b={b:g}&n={n}", n, ((-1.0, 1.5),) + (UNIT,) * (n - 1), ev, {"generator": "iv"}
    )


def _curve_cone(a: float, b: float, n: int, theta0: float = 0.0) -> ImmersionSpec:
    curve = curve_with_curvature(CurveSpec("spherical-spiral", 1, "exp", a, b, (-1.05, 1.55), theta0))

    def ev(x):
        t = x[1]
        return tuple(t * c for c in curve.gamma(x[0])) + tuple(x[2:])

    dom = ((-1.0, 1.5), (0.5, 2.0)) + (UNIT,) * (n - 2)
    return ImmersionSpec(f"cone-spiral?a={a:g}&b={b:g}&n={n}", n, dom, ev, {"generator": "iv"})


def _curve_rotational(law: str, a: float, b: float, n: int, theta0: float = 0.0) -> ImmersionSpec:
    curve = curve_with_curvature(CurveSpec("hyperbolic-curve", -1, law, a, b, (-0.05, 1.55), theta0))

    def ev(x):
        z1, z2 = curve.upper_half_plane(x[0])
        return (z1,) + tuple(z2 * c for c in sphere_chart(x[1:]))

    tag = "rot-sqrt" if law == "sqrt" else "rot-curve"
    return ImmersionSpec(
        f"{tag}?a={a:g}&b={b:g}&n={n}&theta0={theta0:g}",
        n,
        ((0.0, 1.5),) + (UNIT,) * (n - 1),
        ev,
        {"generator": "v" if law == "sqrt" else "rot-exp"},
    )


# -- negative controls ------------------------------------------------------


def graph_hypersurface(n: int) -> ImmersionSpec:
    """A generic graph over a box; has no special Moebius structure."""
    coeffs = [0.3 + 0.25 * i for i in range(n)]

    def ev(x):
        phi = sum(c * xi * xi for c, xi in zip(coeffs, x))
        phi = phi + 0.3 * x[0] * x[1] + 0.1 * x[1] * x[1] * x[1] + 0.2 * T.sin(x[0] + 2.0 * x[n - 1])
        return tuple(x) + (phi,)

    return ImmersionSpec(f"graph?n={n}", n, ((-0.5, 0.5),) * n, ev, {})


# -- transforms -------------------------------------------------------------


def invert(spec: ImmersionSpec, center) -> ImmersionSpec:
    """Post-compose with the inversion ``x -> c + (x - c)/|x - c|^2``."""
    c = [float(v) for v in center]
    if len(c) != spec.n + 1:
        raise ParamOutOfRange(f"inversion center needs {spec.n + 1} coordinates")

    def ev(x):
        d = [p - ci for p, ci in zip(spec.eval(x), c)]
        inv = T.reciprocal(sum(v * v for v in d))
        return tuple(ci + v * inv for ci, v in zip(c, d))

    return spec.with_eval(f"invert({spec.name})", ev, inversion_center=tuple(c))


def stretch(spec: ImmersionSpec, axis: int, factor: float) -> ImmersionSpec:
    """Post-compose with a linear stretch of one ambient axis (not a Moebius map)."""
    if not 0 <= axis <= spec.n:
        raise ParamOutOfRange(f"axis {axis} out of range")

    def ev(x):
        out = list(spec.eval(x))
        out[axis] = out[axis] * float(factor)
        return tuple(out)

    return spec.with_eval(f"stretch({spec.name})", ev, stretch=(axis, float(factor)))


def rescale(spec: ImmersionSpec, factor: float) -> ImmersionSpec:
    def ev(x):
        return tuple(c * float(factor) for c in spec.eval(x))

    return spec.with_eval(f"scale({spec.name})", ev)


# -- registry ---------------------------------------------------------------


@dataclass(frozen=True)
class Entry:
    name: str
    params: Mapping[str, float]
    branch: str
    kind: str  # closed-form | curve | control
    builder: Callable = field(repr=False, compare=False)
    description: str = ""

    def resolve(self, overrides: Mapping[str, str]) -> dict[str, float]:
        unknown = set(overrides) - set(self.params)
        if unknown:
            raise UnknownCatalogEntry(f"{self.name}: unknown parameters {sorted(unknown)}")
        vals = dict(self.params)
        for key, raw in overrides.items():
            try:
                vals[key] = float(raw)
            except ValueError as exc:
                raise ParamOutOfRange(f"{self.name}: {key}={raw!r} is not a number") from exc
        return vals


def _int(v) -> int:
    if float(v) != int(v):
        raise ParamOutOfRange(f"expected an integer parameter, got {v}")
    return int(v)


_ENTRIES: list[Entry] = [
    Entry("cone-clifford", {"r": float(np.sqrt(0.5)), "n": 4}, "ThreeCurv-ConeClifford", "closed-form",
          lambda p: make_cone(clifford_torus(p["r"]), _int(p["n"])),
          "cone over a Clifford torus in S^3"),
    Entry("rot-hypcyl", {"r": 1.0, "n": 5}, "ThreeCurv-RotHypCylinder", "closed-form",
          lambda p: make_rotational(hyperbolic_cylinder(p["r"]), _int(p["n"])),
          "rotational hypersurface over a hyperbolic cylinder in H^3"),
    Entry("cone-product", {"p": 2, "q": 2, "r": 0.6, "n": 5}, "ThreeCurv-MoebiusParallel", "closed-form",
          lambda p: cone_over_product(_int(p["p"]), _int(p["q"]), p["r"], _int(p["n"])),
          "cone over S^p(r) x S^q(sqrt(1-r^2)) times a Euclidean factor"),
    Entry("cylinder", {"k": 1, "n": 4}, "TwoCurv-i", "closed-form",
          lambda p: standard_products(_int(p["k"]), _int(p["n"]), "cylinder"),
          "standard cylinder S^k x R^(n-k)"),
    Entry("cone", {"k": 1, "n": 4, "r": float(np.sqrt(0.5))}, "TwoCurv-ii", "closed-form",
          lambda p: standard_products(_int(p["k"]), _int(p["n"]), "cone", p["r"]),
          "standard cone S^k x H^(n-k)"),
    Entry("torus", {"k": 2, "n": 4, "r": 0.6}, "TwoCurv-iii", "closed-form",
          lambda p: standard_products(_int(p["k"]), _int(p["n"]), "torus", p["r"]),
          "standard torus S^k x S^(n-k), stereographically projected"),
    Entry("cyl-spiral", {"a": 0.3, "b": 1.0, "n": 4}, "TwoCurv-iv", "curve",
          lambda p: _curve_cylinder(p["a"], p["b"], _int(p["n"])),
          "cylinder over a plane curve with curvature b e^(a s)"),
    Entry("cone-spiral", {"a": 0.3, "b": 1.0, "n": 4}, "TwoCurv-iv", "curve",
          lambda p: _curve_cone(p["a"], p["b"], _int(p["n"])),
          "generalized cone over a spherical curve with curvature b e^(a s)"),
    Entry("rot-curve", {"a": 0.3, "b": 1.0, "n": 4, "theta0": 0.0}, "TwoCurv-curve", "curve",
          lambda p: _curve_rotational("exp", p["a"], p["b"], _int(p["n"]), p["theta0"]),
          "rotational hypersurface over a hyperbolic curve with curvature b e^(a s)"),
    Entry("rot-sqrt", {"a": 1.0, "b": 1.0, "n": 4, "theta0": 0.0}, "TwoCurv-v", "curve",
          lambda p: _curve_rotational("sqrt", p["a"], p["b"], _int(p["n"]), p["theta0"]),
          "rotational hypersurface over a hyperbolic curve with curvature 1/sqrt(a s + b)"),
    Entry("cyl-torus", {"n": 4}, "NotSemiParallel", "closed-form",
          lambda p: make_cylinder(torus_of_revolution(), _int(p["n"])),
          "cylinder over a torus of revolution (cylinder-formula check)"),
    Entry("rot-graph", {"n": 4}, "NotSemiParallel", "closed-form",
          lambda p: make_rotational(uhs_graph_surface(), _int(p["n"])),
          "rotational hypersurface over a generic surface (rotation-formula check)"),
    Entry("cone-ellipsoid", {"r": float(np.sqrt(0.5)), "ratio": 1.2, "n": 4}, "NotSemiParallel", "control",
          lambda p: make_cone(stretched_clifford_torus(p["r"], p["ratio"]), _int(p["n"])),
          "cone over a Clifford torus stretched along one axis (negative control)"),
    Entry("graph", {"n": 4}, "NotSemiParallel", "control",
          lambda p: graph_hypersurface(_int(p["n"])),
          "generic graph hypersurface (negative control)"),
]

ENTRIES: dict[str, Entry] = {e.name: e for e in _ENTRIES}


def parse_name(text: str) -> tuple[str, dict[str, str]]:
    base, _, query = text.partition("?")
    pairs = parse_qsl(query, keep_blank_values=True, strict_parsing=True) if query else []
    params: dict[str, str] = {}
    for k, v in pairs:
        if k in params:
            raise UnknownCatalogEntry(f"duplicate parameter {k!r} in {text!r}")
        params[k] = v
    return base.strip(), params


def format_param(v: float) -> str:
    """Short form when it round-trips, otherwise the exact shortest repr."""
    short = f"{v:g}"
    return short if float(short) == float(v) else repr(float(v))


def canonical_name(base: str, params: Mapping[str, float]) -> str:
    """Name that resolves back to exactly the same parameters."""
    return base + "?" + "&".join(f"{k}={format_param(v)}" for k, v in params.items())


@lru_cache(maxsize=128)
def _build(base: str, frozen_params: tuple) -> ImmersionSpec:
    entry = ENTRIES[base]
    params = dict(frozen_params)
    spec = entry.builder(params)
    meta = {**spec.metadata, "entry": base, "params": params, "branch": entry.branch, "kind": entry.kind}
    return ImmersionSpec(canonical_name(base, params), spec.n, spec.domain, spec.eval, meta)


def get(text: str) -> ImmersionSpec:
    """Resolve ``entry?key=value&...`` to an immersion spec."""
    try:
        base, raw = parse_name(text)
    except ValueError as exc:
        raise UnknownCatalogEntry(f"malformed catalog name {text!r}") from exc
    if base not in ENTRIES:
        raise UnknownCatalogEntry(f"unknown catalog entry {base!r}; known: {', '.join(ENTRIES)}")
    params = ENTRIES[base].resolve(raw)
    return _build(base, tuple(params.items()))


def list_entries() -> list[Entry]:
    return list(_ENTRIES)


# -- external spec files ----------------------------------------------------

_SURFACES = {
    "clifford-torus": lambda a: clifford_torus(float(a.get("r", np.sqrt(0.5)))),
    "stretched-clifford-torus": lambda a: stretched_clifford_torus(
        float(a.get("r", np.sqrt(0.5))), float(a.get("ratio", 1.2)), int(a.get("axis", 0))
    ),
    "hyperbolic-cylinder": lambda a: hyperbolic_cylinder(float(a.get("r", 1.0))),
    "torus-of-revolution": lambda a: torus_of_revolution(float(a.get("R", 2.0)), float(a.get("a", 0.7))),
    "uhs-graph": lambda a: uhs_graph_surface(),
}
_CONSTRUCTIONS = {"cylinder": make_cylinder, "cone": make_cone, "rotational": make_rotational}


def from_description(desc: Mapping) -> ImmersionSpec:
    """Build a spec from a JSON-style description.

    Either ``{"entry": "cone-clifford?n=4", "transforms": [...]}`` or
    ``{"surface": {"kind": "clifford-torus", "r": 0.7}, "construction": "cone",
    "n": 4, "transforms": [...]}``.  Transforms are ``{"op": "invert",
    "center": [...]}``, ``{"op": "stretch", "axis": 0, "factor": 1.2}`` and
    ``{"op": "scale", "factor": 2}``.
    """
    if not isinstance(desc, Mapping):
        raise SpecFileError("spec description must be a JSON object")
    try:
        if "entry" in desc:
            spec = get(str(desc["entry"]))
        elif "surface" in desc:
            sdesc = desc["surface"]
            surface = _SURFACES[sdesc["kind"]](sdesc)
            spec = _CONSTRUCTIONS[desc["construction"]](surface, int(desc["n"]))
        else:
            raise SpecFileError("spec description needs an 'entry' or a 'surface'")
        for tr in desc.get("transforms", []):
            op = tr["op"]
            if op == "invert":
                spec = invert(spec, tr["center"])
            elif op == "stretch":
                spec = stretch(spec, int(tr["axis"]), float(tr["factor"]))
            elif op == "scale":
                spec = rescale(spec, float(tr["factor"]))
            else:
                raise SpecFileError(f"unknown transform {op!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecFileError(f"invalid spec description: {exc!r}") from exc
    name = desc.get("name", spec.name)
    return ImmersionSpec(str(name), spec.n, spec.domain, spec.eval, {**spec.metadata, "description": dict(desc)})


def load_spec_file(path) -> ImmersionSpec:
    try:
        desc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecFileError(f"cannot read spec file {path}: {exc}") from exc
    return from_description(desc)


def resolve(target: str) -> ImmersionSpec:
    """Catalog name, or path to a JSON spec file."""
    if target.endswith(".json") or Path(target).is_file():
        return load_spec_file(target)
    return get(target)
