import numpy as np
import pytest

from moebiuslab import catalog
from moebiuslab import taylor as T
from moebiuslab.errors import PointOutsideDomain, RankDeficient, StepTooLarge
from moebiuslab.jets import (
    ImmersionSpec,
    default_fd_step,
    evaluate_jet,
    evaluate_jet_fd,
    jet_relative_error,
    sample_points,
)

BOX = ((-0.5, 0.5),) * 3


def _graph(fn):
    return ImmersionSpec("g", 3, BOX, lambda x: tuple(x) + (fn(x),))


class TestEvaluateJet:
    def test_plane_has_no_higher_derivatives(self):
        spec = _graph(lambda x: 2.0 * x[0] - x[2] + 0.0 * x[1])
        jet = evaluate_jet(spec, [0.1, 0.2, -0.3])
        assert jet.derivative(1)[3].tolist() == [2.0, 0.0, -1.0]
        for k in (2, 3, 4):
            assert np.max(np.abs(jet.derivative(k))) < 1e-14

    def test_sphere_graph_hessian_at_origin(self):
        spec = _graph(lambda x: T.sqrt(1.0 - x[0] * x[0] - x[1] * x[1] - x[2] * x[2]))
        jet = evaluate_jet(spec, [0.0, 0.0, 0.0])
        np.testing.assert_allclose(jet.derivative(2)[3], -np.eye(3), atol=1e-14)

    def test_fourth_derivative_of_exp(self):
        spec = _graph(lambda x: T.exp(x[0]) + 0.0 * x[1])
        jet = evaluate_jet(spec, [0.0, 0.0, 0.0])
        assert jet.derivative(4)[3, 0, 0, 0, 0] == pytest.approx(1.0, abs=1e-13)
        fd = evaluate_jet_fd(spec, [0.0, 0.0, 0.0], h=1e-2)
        assert fd.derivative(4)[3, 0, 0, 0, 0] == pytest.approx(1.0, abs=1e-6)

    def test_tensors_are_symmetric(self):
        spec = catalog.get("graph?n=3")
        jet = evaluate_jet(spec, [0.1, -0.2, 0.3])
        d3 = jet.derivative(3)
        for perm in [(0, 2, 1, 3), (0, 3, 2, 1), (0, 2, 3, 1)]:
            assert np.max(np.abs(d3 - d3.transpose(perm))) < 1e-12


class TestErrors:
    def test_point_outside_domain(self):
        spec = catalog.get("graph?n=3")
        with pytest.raises(PointOutsideDomain):
            evaluate_jet(spec, [0.6, 0.0, 0.0])
        with pytest.raises(PointOutsideDomain):
            evaluate_jet(spec, [0.0, 0.0])

    def test_rank_deficient(self):
        spec = ImmersionSpec("flat", 2, ((-1, 1),) * 2, lambda x: (x[0], x[0] * 1.0, 0.0 * x[1]))
        with pytest.raises(RankDeficient):
            evaluate_jet(spec, [0.1, 0.2])

    def test_step_too_large(self):
        spec = catalog.get("graph?n=3")
        with pytest.raises(StepTooLarge):
            evaluate_jet_fd(spec, [0.45, 0.0, 0.0], h=0.05)


class TestFiniteDifferenceOracle:
    @pytest.mark.parametrize("name", ["cylinder?k=2&n=3", "cone-clifford", "torus", "graph?n=3"])
    def test_taylor_jet_agrees_with_fd(self, name):
        spec = catalog.get(name)
        for x in sample_points(spec, 3, seed=1, inset=0.1):
            errs = jet_relative_error(evaluate_jet(spec, x), evaluate_jet_fd(spec, x))
            assert max(errs) < 1e-5, errs

    def test_default_step_scales_with_smallest_width(self):
        spec = catalog.get("cone-clifford")
        assert default_fd_step(spec) == pytest.approx(5e-3 * 1.5)


def test_sampling_is_seeded_and_inset():
    spec = catalog.get("cone-clifford")
    a, b = sample_points(spec, 16, 3), sample_points(spec, 16, 3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_points(spec, 16, 4))
    w = spec.upper - spec.lower
    assert np.all(a >= spec.lower + 0.05 * w) and np.all(a <= spec.upper - 0.05 * w)
