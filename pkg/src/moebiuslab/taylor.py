"""Truncated multivariate Taylor arithmetic.

A :class:`Taylor` holds the coefficients of a polynomial in ``nvars`` formal
increments, truncated at some total degree (its *order*).  Leading array
dimensions are allowed, so a Taylor object can carry a whole vector or matrix
field around a base point.  Orders are tracked per object: multiplying a
degree-5 field by a degree-3 field yields a degree-3 field, and every partial
derivative lowers the order by one.  That bookkeeping keeps the downstream
curvature computations cheap.

Elementary functions (``exp``, ``log``, ``sin``, ``cos``, ``sqrt``, ``power``
and friends) accept Taylor objects, Python floats and numpy arrays, so chart
maps written against this module evaluate both on jets and on plain points.
"""

from __future__ import annotations

import functools
import itertools
import math
from typing import Sequence

import numpy as np

DEFAULT_DEGREE = 5


class Basis:
    """Monomial basis in ``nvars`` variables up to total degree ``degree``.

    Monomials are ordered by total degree so that the coefficients of every
    lower truncation order form a prefix of the full coefficient vector.
    """

    def __init__(self, nvars: int, degree: int):
        self.nvars = nvars
        self.degree = degree
        exps = []
        for d in range(degree + 1):
            for combo in itertools.combinations_with_replacement(range(nvars), d):
                e = [0] * nvars
                for v in combo:
                    e[v] += 1
                exps.append(tuple(e))
        self.exps = np.array(exps, dtype=np.int64).reshape(len(exps), nvars)
        self.index = {e: k for k, e in enumerate(exps)}
        tot = self.exps.sum(axis=1)
        self.sizes = [int(np.count_nonzero(tot <= d)) for d in range(degree + 1)]
        self._order_of_size = {s: d for d, s in enumerate(self.sizes)}
        self.factorials = np.array(
            [math.prod(math.factorial(int(a)) for a in e) for e in exps], dtype=float
        )

        I, J, starts = [], [], []
        for k, ek in enumerate(exps):
            starts.append(len(I))
            ek_arr = np.array(ek)
            for i, ei in enumerate(exps[: k + 1]):
                rest = ek_arr - np.array(ei)
                if (rest >= 0).all():
                    I.append(i)
                    J.append(self.index[tuple(rest)])
        self.mul_i = np.array(I, dtype=np.int64)
        self.mul_j = np.array(J, dtype=np.int64)
        self.mul_starts = np.array(starts, dtype=np.int64)
        # pairs feeding monomials of degree <= d form a prefix as well
        self.pair_counts = [
            int(starts[s]) if s < len(starts) else len(I) for s in self.sizes
        ]

        self.diff_src = []
        self.diff_fac = []
        top = self.sizes[degree - 1] if degree > 0 else 0
        for v in range(nvars):
            src = np.empty(top, dtype=np.int64)
            fac = np.empty(top)
            for k in range(top):
                e = list(exps[k])
                fac[k] = e[v] + 1
                e[v] += 1
                src[k] = self.index[tuple(e)]
            self.diff_src.append(src)
            self.diff_fac.append(fac)

    def order_of(self, size: int) -> int:
        return self._order_of_size[size]


@functools.lru_cache(maxsize=None)
def basis(nvars: int, degree: int = DEFAULT_DEGREE) -> Basis:
    return Basis(nvars, degree)


class Taylor:
    """Array of truncated Taylor polynomials sharing one :class:`Basis`.

    ``coef`` has shape ``shape + (m,)`` where ``m`` is the number of monomials
    of total degree at most ``order``.
    """

    __slots__ = ("coef", "basis")
    __array_ufunc__ = None

    def __init__(self, coef, basis: Basis):
        self.coef = np.asarray(coef, dtype=float)
        self.basis = basis

    # -- construction -----------------------------------------------------
    @classmethod
    def variables(cls, point: Sequence[float], degree: int = DEFAULT_DEGREE) -> list[Taylor]:
        """Independent variables ``x_i + d_i`` around ``point``."""
        n = len(point)
        b = basis(n, degree)
        out = []
        for i, x in enumerate(point):
            c = np.zeros(b.sizes[degree])
            c[0] = x
            if degree >= 1:
                c[1 + i] = 1.0
            out.append(cls(c, b))
        return out

    @classmethod
    def constant(cls, value, basis: Basis, order: int | None = None) -> Taylor:
        value = np.asarray(value, dtype=float)
        order = basis.degree if order is None else order
        c = np.zeros(value.shape + (basis.sizes[order],))
        c[..., 0] = value
        return cls(c, basis)

    @classmethod
    def stack(cls, items: Sequence, axis: int = 0) -> Taylor:
        b = next(x.basis for x in items if isinstance(x, Taylor))
        order = min(x.order for x in items if isinstance(x, Taylor))
        m = b.sizes[order]
        parts = []
        for x in items:
            if isinstance(x, Taylor):
                parts.append(x.coef[..., :m])
            else:
                parts.append(Taylor.constant(x, b, order).coef)
        if axis < 0:
            axis -= 1
        return cls(np.stack(parts, axis=axis), b)

    # -- introspection ----------------------------------------------------
    @property
    def order(self) -> int:
        return self.basis.order_of(self.coef.shape[-1])

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coef.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.coef.ndim - 1

    @property
    def value(self):
        v = self.coef[..., 0]
        return float(v) if v.ndim == 0 else v.copy()

    def __len__(self) -> int:
        return self.shape[0]

    def __repr__(self) -> str:
        return f"Taylor(shape={self.shape}, order={self.order}, value={self.value!r})"

    def __getitem__(self, key) -> Taylor:
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis or k is None for k in key) or len(key) > self.ndim:
            raise IndexError("Taylor indexing supports plain int/slice keys over leading axes")
        return Taylor(self.coef[key], self.basis)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def T(self) -> Taylor:
        axes = tuple(reversed(range(self.ndim))) + (self.ndim,)
        return Taylor(self.coef.transpose(axes), self.basis)

    def swapaxes(self, a: int, b: int) -> Taylor:
        return Taylor(np.swapaxes(self.coef, a % self.ndim, b % self.ndim), self.basis)

    def reshape(self, *shape) -> Taylor:
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Taylor(self.coef.reshape(tuple(shape) + (self.coef.shape[-1],)), self.basis)

    def truncate(self, order: int) -> Taylor:
        if order >= self.order:
            return self
        return Taylor(self.coef[..., : self.basis.sizes[order]], self.basis)

    def sum(self, axis=None) -> Taylor:
        if axis is None:
            axis = tuple(range(self.ndim))
        elif isinstance(axis, int):
            axis = (axis % self.ndim,)
        else:
            axis = tuple(a % self.ndim for a in axis)
        return Taylor(self.coef.sum(axis=axis), self.basis)

    # -- derivatives ------------------------------------------------------
    def deriv(self, var: int) -> Taylor:
        """Partial derivative with respect to variable ``var`` (order drops by one)."""
        order = self.order
        if order == 0:
            raise ValueError("cannot differentiate an order-0 Taylor polynomial")
        m = self.basis.sizes[order - 1]
        src = self.basis.diff_src[var][:m]
        fac = self.basis.diff_fac[var][:m]
        return Taylor(self.coef[..., src] * fac, self.basis)

    def grad(self) -> Taylor:
        """Stack of all first partials along a new trailing axis."""
        return Taylor.stack([self.deriv(v) for v in range(self.basis.nvars)], axis=-1)

    def partial(self, alpha: Sequence[int]):
        """Value of the mixed partial derivative ``d^alpha`` at the base point."""
        k = self.basis.index[tuple(int(a) for a in alpha)]
        if k >= self.coef.shape[-1]:
            raise ValueError(f"derivative order {sum(alpha)} exceeds Taylor order {self.order}")
        out = self.coef[..., k] * self.basis.factorials[k]
        return float(out) if np.ndim(out) == 0 else out

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Taylor):
            return other
        return np.asarray(other, dtype=float)

    def __add__(self, other):
        other = self._coerce(other)
        if isinstance(other, Taylor):
            m = min(self.coef.shape[-1], other.coef.shape[-1])
            return Taylor(self.coef[..., :m] + other.coef[..., :m], self.basis)
        shape = np.broadcast_shapes(self.shape, other.shape)
        c = np.broadcast_to(self.coef, shape + self.coef.shape[-1:]).copy()
        c[..., 0] += other
        return Taylor(c, self.basis)

    __radd__ = __add__

    def __neg__(self):
        return Taylor(-self.coef, self.basis)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if isinstance(other, Taylor):
            return _mul(self, other)
        return Taylor(self.coef * other[..., None], self.basis)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if isinstance(other, Taylor):
            return self * reciprocal(other)
        return Taylor(self.coef / other[..., None], self.basis)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        return power(self, p)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)


def _mul(a: Taylor, b: Taylor) -> Taylor:
    bs = a.basis
    order = min(a.order, b.order)
    m = bs.sizes[order]
    p = bs.pair_counts[order]
    prod = a.coef[..., bs.mul_i[:p]] * b.coef[..., bs.mul_j[:p]]
    return Taylor(np.add.reduceat(prod, bs.mul_starts[:m], axis=-1), bs)


def einsum(subscripts: str, a, b) -> Taylor:
    """Two-operand einsum where either operand may be a Taylor array."""
    ins, out = subscripts.replace(" ", "").split("->")
    sa, sb = ins.split(",")
    if isinstance(a, Taylor) and isinstance(b, Taylor):
        bs = a.basis
        order = min(a.order, b.order)
        m = bs.sizes[order]
        p = bs.pair_counts[order]
        prod = np.einsum(
            f"{sa}Z,{sb}Z->{out}Z", a.coef[..., bs.mul_i[:p]], b.coef[..., bs.mul_j[:p]]
        )
        return Taylor(np.add.reduceat(prod, bs.mul_starts[:m], axis=-1), bs)
    if isinstance(a, Taylor):
        return Taylor(np.einsum(f"{sa}Z,{sb}->{out}Z", a.coef, np.asarray(b, float)), a.basis)
    if isinstance(b, Taylor):
        return Taylor(np.einsum(f"{sa},{sb}Z->{out}Z", np.asarray(a, float), b.coef), b.basis)
    return np.einsum(subscripts, a, b)


def matmul(a, b):
    """Matrix product for Taylor matrices (or matrix-vector)."""
    va = (a.ndim if isinstance(a, Taylor) else np.ndim(a)) == 1
    vb = (b.ndim if isinstance(b, Taylor) else np.ndim(b)) == 1
    if va and vb:
        return einsum("i,i->", a, b)
    if vb:
        return einsum("ij,j->i", a, b)
    if va:
        return einsum("i,ij->j", a, b)
    return einsum("ij,jk->ik", a, b)


def eye(n: int, basis: Basis, order: int | None = None) -> Taylor:
    return Taylor.constant(np.eye(n), basis, order)


def trace(m: Taylor) -> Taylor:
    return Taylor(np.trace(m.coef, axis1=0, axis2=1), m.basis)


def inv(m: Taylor) -> Taylor:
    """Inverse of a Taylor matrix by a finite Neumann series about its value."""
    m0inv = np.linalg.inv(m.value)
    delta = m - m.value
    p = matmul(m0inv, delta)
    out = Taylor.constant(m0inv, m.basis, m.order)
    for _ in range(m.order):
        out = m0inv - matmul(p, out)
    return out


# -- elementary functions ---------------------------------------------------


def _compose(x: Taylor, coeffs: np.ndarray) -> Taylor:
    """Evaluate ``sum_k coeffs[k] * (x - x0)**k`` in truncated arithmetic."""
    delta = x - x.value
    out = Taylor.constant(coeffs[-1], x.basis, x.order)
    for c in coeffs[-2::-1]:
        out = out * delta + c
    return out


def _series(x: Taylor, kind: str, p: float = 0.0) -> np.ndarray:
    x0 = np.asarray(x.value, dtype=float)
    d = x.order
    ks = range(d + 1)
    if kind == "exp":
        e = np.exp(x0)
        return np.array([e / math.factorial(k) for k in ks])
    if kind == "log":
        return np.array([np.log(x0)] + [(-1) ** (k + 1) / (k * x0**k) for k in range(1, d + 1)])
    if kind == "sin":
        return np.array([np.sin(x0 + k * np.pi / 2) / math.factorial(k) for k in ks])
    if kind == "cos":
        return np.array([np.cos(x0 + k * np.pi / 2) / math.factorial(k) for k in ks])
    if kind == "pow":
        out = []
        binom = 1.0
        for k in ks:
            out.append(binom * x0 ** (p - k))
            binom *= (p - k) / (k + 1)
        return np.array(out)
    raise ValueError(kind)


def exp(x):
    if isinstance(x, Taylor):
        return _compose(x, _series(x, "exp"))
    return np.exp(x)


def log(x):
    if isinstance(x, Taylor):
        return _compose(x, _series(x, "log"))
    return np.log(x)


def sin(x):
    if isinstance(x, Taylor):
        return _compose(x, _series(x, "sin"))
    return np.sin(x)


def cos(x):
    if isinstance(x, Taylor):
        return _compose(x, _series(x, "cos"))
    return np.cos(x)


def sinh(x):
    return (exp(x) - exp(-x)) * 0.5


def cosh(x):
    return (exp(x) + exp(-x)) * 0.5


def power(x, p):
    if not isinstance(x, Taylor):
        return np.power(x, p)
    if float(p).is_integer() and p >= 0:
        out = Taylor.constant(np.ones(x.shape), x.basis, x.order)
        for _ in range(int(p)):
            out = out * x
        return out
    return _compose(x, _series(x, "pow", float(p)))


def sqrt(x):
    if isinstance(x, Taylor):
        return _compose(x, _series(x, "pow", 0.5))
    return np.sqrt(x)


def reciprocal(x):
    if isinstance(x, Taylor):
        return _compose(x, _series(x, "pow", -1.0))
    return 1.0 / np.asarray(x, dtype=float)


def value(x):
    """Base-point value of a Taylor object, or the argument itself."""
    return x.value if isinstance(x, Taylor) else x
