import numpy as np
import pytest

from moebiuslab import catalog
from moebiuslab import taylor as T
from moebiuslab.errors import UmbilicPoint
from moebiuslab.invariants import (
    classical_data,
    exterior_derivative_omega,
    moebius_data,
    moebius_field,
    moebius_shape_operator,
    rho,
    sectional_from_data,
    structure_residuals,
)
from moebiuslab.jets import ImmersionSpec, evaluate_jet, sample_points
from moebiuslab.semiparallel import semiparallel_direct
from moebiuslab.surfaces import mu_squared, surface_field

CONE_POINT = np.array([0.4, 1.1, 1.3, 0.2])


def _data(spec, x, normal_sign=1):
    return moebius_data(moebius_field(evaluate_jet(spec, x), normal_sign))


class TestClassical:
    def test_plane_has_zero_shape_operator(self):
        spec = ImmersionSpec("plane", 2, ((-1, 1),) * 2, lambda x: (x[0], x[1], 0.5 * x[0] - x[1]))
        cd = classical_data(evaluate_jet(spec, [0.2, 0.1]))
        assert np.max(np.abs(cd.A)) < 1e-15
        assert cd.H == 0.0

    def test_round_sphere_is_umbilic(self):
        sphere = ImmersionSpec("sphere", 2, ((-1, 1),) * 2, lambda x: catalog.sphere_chart(x))
        cd = classical_data(evaluate_jet(sphere, [0.3, -0.2]))
        np.testing.assert_allclose(np.abs(cd.principal_curvatures()), [1.0, 1.0], atol=1e-12)
        with pytest.raises(UmbilicPoint):
            rho(cd)
        with pytest.raises(UmbilicPoint):
            moebius_field(evaluate_jet(sphere, [0.3, -0.2]))

    def test_cylinder_s1_r3(self):
        # S^1 x R^3: curvatures {1, 0, 0, 0}, H = 1/4, |alpha|^2 = 1, rho = 1.
        cd = classical_data(evaluate_jet(catalog.get("cylinder"), [0.3, 0.1, -0.2, 0.4]))
        np.testing.assert_allclose(sorted(np.abs(cd.principal_curvatures())), [0, 0, 0, 1], atol=1e-12)
        assert abs(cd.H) == pytest.approx(0.25, abs=1e-13)
        assert cd.alpha_norm2 == pytest.approx(1.0, abs=1e-12)
        assert rho(cd) == pytest.approx(1.0, abs=1e-12)
        _, lam, _ = moebius_shape_operator(cd, 1.0)
        np.testing.assert_allclose(sorted(np.sign(cd.H) * lam), [-0.25, -0.25, -0.25, 0.75], atol=1e-12)


class TestMoebiusInvariants:
    def test_cylinder_blaschke_and_form(self):
        # rho and H constant: psi = H B + H^2/2 I and omega = 0.
        md = _data(catalog.get("cylinder"), [0.3, 0.1, -0.2, 0.4])
        H = md.H
        np.testing.assert_allclose(md.psi, H * md.B + 0.5 * H * H * np.eye(4), atol=1e-12)
        assert np.max(np.abs(md.omega)) < 1e-12
        inv = np.sort(md.lambda_bar**2 + 2 * md.theta)
        np.testing.assert_allclose(inv, [0, 0, 0, 1], atol=1e-12)

    def test_cone_clifford_curvatures(self):
        t = CONE_POINT[2]
        md = _data(catalog.get("cone-clifford"), CONE_POINT)
        np.testing.assert_allclose(md.principal_curvatures, [-1 / t, 0, 0, 1 / t], atol=1e-12)
        assert md.rho == pytest.approx(np.sqrt(8 / 3) / t, rel=1e-12)
        s = np.sqrt(3 / 8)
        np.testing.assert_allclose(md.lambda_bar, [-s, 0, 0, s], atol=1e-12)

    def test_normal_flip(self):
        spec = catalog.get("graph")
        x = [0.1, 0.2, -0.1, 0.05]
        a, b = _data(spec, x, 1), _data(spec, x, -1)
        assert a.rho == pytest.approx(b.rho, rel=1e-13)
        np.testing.assert_allclose(a.lambda_bar, -b.lambda_bar[::-1], atol=1e-12)
        np.testing.assert_allclose(a.lambda_bar**2 + 2 * a.theta, (b.lambda_bar**2 + 2 * b.theta)[::-1], atol=1e-10)

    def test_dilation_invariance(self):
        spec = catalog.get("cone-clifford")
        x2 = CONE_POINT.copy()
        x2[2] *= 1.5
        a, b = _data(spec, CONE_POINT), _data(spec, x2)
        np.testing.assert_allclose(a.lambda_bar, b.lambda_bar, atol=1e-12)
        np.testing.assert_allclose(a.theta, b.theta, atol=1e-10)
        assert a.s_star == pytest.approx(b.s_star, abs=1e-10)

    @pytest.mark.parametrize("name", ["graph", "cone-ellipsoid", "rot-hypcyl?n=4"])
    def test_inversion_invariance(self, name):
        spec = catalog.get(name)
        inverted = catalog.invert(spec, [3.1, -2.9, 3.3, 2.7, -3.4, 2.2][: spec.n + 1])
        for x in sample_points(spec, 4, seed=2):
            a, b = _data(spec, x), _data(inverted, x)
            same = np.max(np.abs(a.lambda_bar - b.lambda_bar))
            flipped = np.max(np.abs(a.lambda_bar + b.lambda_bar[::-1]))
            assert min(same, flipped) < 1e-9

    def test_mixed_sectional_curvature_of_product_vanishes(self):
        # Moebius metric of S^1 x R^3 is flat.
        md = _data(catalog.get("cylinder"), [0.3, 0.1, -0.2, 0.4])
        K = sectional_from_data(md)
        e = np.eye(4)
        for i in range(4):
            for j in range(i + 1, 4):
                assert abs(K(e[i], e[j])) < 1e-12


@pytest.fixture(scope="module")
def field():
    return moebius_field(evaluate_jet(catalog.get("cone-clifford"), CONE_POINT))


class TestSemiParallelExample:
    """The cone over the minimal Clifford torus, checked pointwise."""

    def test_moebius_form_is_closed(self, field):
        assert np.max(np.abs(exterior_derivative_omega(field))) < 1e-7

    def test_pairwise_identity(self, field):
        md = moebius_data(field)
        for i in range(4):
            for j in range(4):
                if abs(md.lambda_bar[i] - md.lambda_bar[j]) > 1e-6:
                    assert abs(md.lambda_bar[i] * md.lambda_bar[j] + md.theta[i] + md.theta[j]) < 1e-7

    def test_mixed_sectional_curvature_vanishes(self, field):
        md = moebius_data(field)
        K = sectional_from_data(md)
        V = md.eigenframe
        for i in range(4):
            for j in range(4):
                if abs(md.lambda_bar[i] - md.lambda_bar[j]) > 1e-6:
                    assert abs(K(V[:, i], V[:, j])) < 1e-6


class TestConformalFactorFormulas:
    """rho^2 of cylinders, cones and rotations against the surface data."""

    def _rho2(self, spec, x):
        return _data(spec, x).rho ** 2

    def test_cylinder(self):
        g = catalog.torus_of_revolution()
        spec = catalog.make_cylinder(g, 4)
        for x in sample_points(spec, 32, seed=7):
            assert self._rho2(spec, x) == pytest.approx(mu_squared(surface_field(g, x[:2]), 4).value, rel=1e-10)

    def test_cone(self):
        g = catalog.clifford_torus(0.6)
        spec = catalog.make_cone(g, 5)
        x = np.array([0.4, 1.2, 1.3, 0.1, -0.3])
        mu2 = mu_squared(surface_field(g, x[:2]), 5).value
        assert self._rho2(spec, x) == pytest.approx(mu2 / x[2] ** 2, rel=1e-11)

    @pytest.mark.parametrize("g", [catalog.uhs_graph_surface(), catalog.hyperbolic_cylinder(1.0)])
    def test_rotational(self, g):
        spec = catalog.make_rotational(g, 4)
        x = np.array([0.3, 0.5, 0.2, -0.1])
        sf = surface_field(g, x[:2])
        z3 = sf.F.value[2]
        assert self._rho2(spec, x) == pytest.approx(mu_squared(sf, 4).value / z3**2, rel=1e-11)

    def test_rotational_multiple_curvature(self):
        g = catalog.hyperbolic_cylinder(0.5)
        spec = catalog.make_rotational(g, 5)
        x = np.array([0.3, 0.5, 0.2, -0.1, 0.4])
        sf = surface_field(g, x[:2])
        lam3 = sf.normal_euclid.value[2] / sf.F.value[2]
        k = np.abs(_data(spec, x).principal_curvatures)
        assert np.sum(np.isclose(k, abs(lam3), atol=1e-10)) == 3


class TestStructureEquations:
    @pytest.mark.parametrize("name", ["graph", "cone-ellipsoid", "rot-graph", "cyl-spiral"])
    def test_residuals_small(self, name):
        spec = catalog.get(name)
        for x in sample_points(spec, 3, seed=5):
            r = structure_residuals(moebius_field(evaluate_jet(spec, x)))
            assert max(r.as_dict().values()) < 1e-8, r

    def test_corrupted_b_grows_linearly(self):
        md = _data(catalog.get("cone-clifford"), CONE_POINT)
        rng = np.random.default_rng(0)
        M = rng.normal(size=(4, 4))
        base = semiparallel_direct(md.R_star, md.B, md.gs)
        r3 = semiparallel_direct(md.R_star, md.B + 1e-3 * M, md.gs)
        r4 = semiparallel_direct(md.R_star, md.B + 1e-4 * M, md.gs)
        assert base < 1e-12
        assert r3 / r4 == pytest.approx(10.0, rel=1e-3)


def test_taylor_field_orders():
    mf = moebius_field(evaluate_jet(catalog.get("graph"), [0.1, 0.2, -0.1, 0.05]))
    assert mf.rho.order >= 3 and mf.psi.order >= 1
    assert isinstance(mf.rho, T.Taylor)
