import numpy as np
import pytest

from moebiuslab import catalog
from moebiuslab.classifier import BRANCHES, SampleConfig, classify, constancy_table, match_clusters
from moebiuslab.errors import InsufficientSamples

CFG = SampleConfig(point_count=16, seed=3)


@pytest.fixture(scope="module")
def reports():
    cache = {}

    def get(name, cfg=CFG):
        key = (name, cfg)
        if key not in cache:
            cache[key] = classify(catalog.get(name), cfg)
        return cache[key]

    return get


class TestConfig:
    def test_needs_eight_points(self):
        with pytest.raises(InsufficientSamples):
            SampleConfig(point_count=7)

    @pytest.mark.parametrize("kw", [{"tol": 0.0}, {"tol_cluster": -1.0}, {"inset": 0.5}])
    def test_rejects_bad_values(self, kw):
        with pytest.raises(ValueError):
            SampleConfig(**kw)


class TestConstancyTable:
    def test_spread_and_flag(self):
        rows = constancy_table({"a": [1.0, 1.0 + 1e-8], "b": [0.0, 0.5, -0.5]}, tol=1e-6)
        assert [r.quantity for r in rows] == ["a", "b"]
        assert rows[0].constant and rows[0].spread == pytest.approx(1e-8)
        assert not rows[1].constant and rows[1].spread == 1.0

    def test_empty_is_rejected(self):
        with pytest.raises(ValueError):
            constancy_table({"a": []})


def test_cluster_matching_follows_values():
    perm, dist = match_clusters(np.array([-1.0, 0.0, 2.0]), np.array([2.01, -0.99, 0.0]))
    assert perm.tolist() == [1, 2, 0]
    assert dist == pytest.approx(0.01)


@pytest.mark.parametrize(
    "name, branch",
    [
        ("cone-clifford", "ThreeCurv-ConeClifford"),
        ("cone-clifford?n=3", "ThreeCurv-ConeClifford"),
        ("rot-hypcyl?n=4", "ThreeCurv-RotHypCylinder"),
        ("cone-product", "ThreeCurv-MoebiusParallel"),
        ("cylinder?k=2", "TwoCurv-i"),
        ("cone?k=2", "TwoCurv-ii"),
        ("torus?k=1", "TwoCurv-iii"),
        ("cyl-spiral", "TwoCurv-iv"),
        ("cone-spiral", "TwoCurv-iv"),
        ("rot-curve", "TwoCurv-curve"),
        ("cyl-torus", "NotSemiParallel"),
        ("rot-graph", "NotSemiParallel"),
        ("graph", "NotSemiParallel"),
    ],
)
def test_branches(reports, name, branch):
    rep = reports(name)
    assert rep.branch == branch
    assert rep.branch in BRANCHES


def test_report_is_deterministic(reports):
    a = reports("cone-clifford")
    b = classify(catalog.get("cone-clifford"), CFG)
    assert a == b


def test_label_survives_inversion():
    spec = catalog.get("rot-hypcyl?n=4")
    inverted = catalog.invert(spec, [3.1, -2.9, 3.3, 2.7, -3.4])
    inverted = inverted.with_eval(inverted.name, inverted.eval, branch=None, generator=None)
    assert classify(inverted, CFG).branch == "ThreeCurv-RotHypCylinder"


def test_threads_do_not_change_the_result(reports):
    assert classify(catalog.get("torus"), CFG, workers=4) == reports("torus")


def test_two_cluster_evidence(reports):
    rep = reports("cylinder")
    assert rep.multiplicities in ((1, 3), (3, 1))
    assert rep.evidence["min_abs_invariant"] < 1e-10
    assert rep.row("s_star").constant


def test_spiral_cylinder_has_constant_spectrum_but_live_form(reports):
    rep = reports("cyl-spiral")
    assert rep.row("lambda_bar[0]").spread < 1e-6 and rep.row("lambda_bar[1]").spread < 1e-6
    assert not rep.row("invariant[0]").constant
    assert rep.evidence["max_omega_norm"] > 1e-3
