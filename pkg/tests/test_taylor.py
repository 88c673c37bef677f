import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moebiuslab import taylor as T
from moebiuslab.taylor import Taylor

coeff = st.floats(-2.0, 2.0, allow_nan=False)
points = st.tuples(coeff, coeff)


def _poly(point, c, degree=4):
    x, y = Taylor.variables(point, degree)
    return c[0] + c[1] * x + c[2] * y * x + c[3] * y * y * y


def _close(a: Taylor, b: Taylor, tol=1e-10):
    m = min(a.coef.shape[-1], b.coef.shape[-1])
    np.testing.assert_allclose(a.coef[..., :m], b.coef[..., :m], atol=tol, rtol=tol)


class TestRing:
    @given(points, st.lists(coeff, min_size=4, max_size=4), st.lists(coeff, min_size=4, max_size=4))
    @settings(max_examples=40, deadline=None)
    def test_multiplication_commutes(self, p, c1, c2):
        a, b = _poly(p, c1), _poly(p, c2)
        _close(a * b, b * a)

    @given(points, *[st.lists(coeff, min_size=4, max_size=4)] * 3)
    @settings(max_examples=40, deadline=None)
    def test_distributive_and_associative(self, p, c1, c2, c3):
        a, b, c = _poly(p, c1), _poly(p, c2), _poly(p, c3)
        _close(a * (b + c), a * b + a * c, 1e-9)
        _close((a * b) * c, a * (b * c), 1e-9)

    @given(points, st.lists(coeff, min_size=4, max_size=4))
    @settings(max_examples=40, deadline=None)
    def test_product_rule(self, p, c1):
        a = _poly(p, c1)
        b = T.sin(_poly(p, c1[::-1]))
        lhs = (a * b).grad()
        rhs = a.grad() * b + a * b.grad()
        _close(lhs, rhs, 1e-9)


class TestSeries:
    @pytest.mark.parametrize(
        "fn, ref",
        [
            (T.exp, math.exp),
            (T.log, math.log),
            (T.sin, math.sin),
            (T.cos, math.cos),
            (T.sqrt, math.sqrt),
            (T.sinh, math.sinh),
            (T.cosh, math.cosh),
        ],
    )
    def test_derivatives_match_finite_differences(self, fn, ref):
        x0, h = 0.7, 1e-3
        (x,) = Taylor.variables([x0], 5)
        y = fn(x)
        assert y.value == pytest.approx(ref(x0), rel=1e-14)
        fd1 = (ref(x0 + h) - ref(x0 - h)) / (2 * h)
        fd2 = (ref(x0 + h) - 2 * ref(x0) + ref(x0 - h)) / h**2
        assert y.grad()[0].value == pytest.approx(fd1, rel=1e-6)
        assert y.grad()[0].grad()[0].value == pytest.approx(fd2, rel=1e-5)

    def test_exp_coefficients_are_reciprocal_factorials(self):
        (x,) = Taylor.variables([0.0], 5)
        np.testing.assert_allclose(T.exp(x).coef, [1 / math.factorial(k) for k in range(6)], rtol=1e-15)

    def test_log_inverts_exp(self):
        x, y = Taylor.variables([0.3, -0.4], 5)
        z = x * y + x
        _close(T.log(T.exp(z)), z, 1e-12)

    def test_power_matches_repeated_product(self):
        x, y = Taylor.variables([1.3, 0.4], 5)
        z = x + y * y
        _close(T.power(z, 3), z * z * z, 1e-12)
        _close(T.power(z, -0.5) * T.power(z, -0.5) * z, Taylor.constant(1.0, z.basis), 1e-12)

    def test_plain_floats_pass_through(self):
        assert T.exp(0.0) == 1.0
        assert T.reciprocal(4.0) == 0.25


class TestMatrices:
    def test_inverse_times_matrix_is_identity(self):
        x, y = Taylor.variables([0.2, -0.1], 5)
        M = Taylor.stack([Taylor.stack([2.0 + x, y * x]), Taylor.stack([y, 1.5 + T.sin(y)])])
        I = T.matmul(T.inv(M), M)
        _close(I, T.eye(2, x.basis), 1e-12)

    def test_derivative_lowers_order(self):
        x, y = Taylor.variables([0.0, 0.0], 5)
        assert (x * y).order == 5
        assert (x * y).grad().order == 4
