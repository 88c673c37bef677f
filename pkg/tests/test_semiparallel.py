import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moebiuslab import catalog
from moebiuslab.errors import DegenerateSpectrum, IndeterminateSpectrum, NonRealMu
from moebiuslab.invariants import moebius_data, moebius_field
from moebiuslab.jets import evaluate_jet, sample_points
from moebiuslab.semiparallel import (
    Verdict,
    check_cond_m,
    check_warped_lemma,
    cluster_spectrum,
    semiparallel_direct,
    semiparallel_spectral,
    verdict,
)
from moebiuslab.surfaces import SurfaceSpec


class TestClustering:
    def test_groups_by_gap(self):
        rep = cluster_spectrum([-0.6, 0.0, 1e-9, 0.6], [0.1, 0.2, 0.2, 0.3])
        assert rep.multiplicities == (1, 2, 1)
        assert rep.separation == pytest.approx(0.6, abs=1e-8)
        assert not rep.indeterminate
        np.testing.assert_allclose(rep.theta_by_cluster, [0.1, 0.2, 0.3])

    def test_wide_cluster_is_indeterminate(self):
        rep = cluster_spectrum([0.0, 5e-7, 1.4e-6, 1.0], np.zeros(4), tol_cluster=1e-6)
        assert rep.multiplicities == (3, 1)
        assert not rep.indeterminate
        rep = cluster_spectrum([0.0, 0.05, 0.1, 0.5], np.zeros(4), tol_cluster=0.06)
        assert rep.indeterminate
        with pytest.raises(IndeterminateSpectrum):
            semiparallel_spectral(rep)

    def test_single_cluster_is_degenerate(self):
        with pytest.raises(DegenerateSpectrum):
            cluster_spectrum([0.2, 0.2, 0.2], [0.0, 0.0, 0.0])

    @pytest.mark.parametrize("lam", [[0.2, 0.1], [[0.1, 0.2]]])
    def test_input_validation(self, lam):
        with pytest.raises(ValueError):
            cluster_spectrum(lam, np.zeros_like(np.asarray(lam)))

    @given(st.lists(st.floats(-3, 3), min_size=2, max_size=8, unique=True))
    @settings(max_examples=60, deadline=None)
    def test_clusters_partition_the_spectrum(self, vals):
        lam = np.sort(np.asarray(vals))
        if lam[-1] - lam[0] <= 1e-6 * max(1.0, np.abs(lam).max()):
            return
        rep = cluster_spectrum(lam, np.zeros_like(lam))
        assert sum(rep.multiplicities) == lam.size
        idx = [i for c in rep.clusters for i in c.indices]
        assert idx == list(range(lam.size))

    def test_spectral_residual_two_by_two(self):
        rep = cluster_spectrum([-0.25, 0.75], [-1 / 32, 7 / 32])
        assert semiparallel_spectral(rep) == pytest.approx(0.0, abs=1e-16)
        rep = cluster_spectrum([-0.5, 0.5], [0.0, 0.0])
        assert semiparallel_spectral(rep) == pytest.approx(0.25)


class TestVerdict:
    @pytest.mark.parametrize(
        "direct, spectral, expected",
        [
            (1e-9, 1e-8, Verdict.SEMI_PARALLEL),
            (1e-3, 2e-2, Verdict.NOT_SEMI_PARALLEL),
            (5e-6, 5e-6, Verdict.INDETERMINATE),
            (1e-9, 1e-3, Verdict.INDETERMINATE),
        ],
    )
    def test_hysteresis(self, direct, spectral, expected):
        v = verdict(direct, spectral, 1e-6)
        assert v.verdict == expected
        assert (v.diagnostic != "") == (expected == Verdict.INDETERMINATE)

    def test_scalar_shape_operator_commutes_with_everything(self):
        rng = np.random.default_rng(3)
        R = rng.normal(size=(3, 3, 3, 3))
        assert semiparallel_direct(R, 0.7 * np.eye(3), np.eye(3)) < 1e-14


class TestWarpedLemma:
    @pytest.mark.parametrize("name", ["cone-clifford", "rot-hypcyl?r=0.5&n=4", "cylinder?k=2&n=4"])
    def test_invariant_constant_along_multiple_cluster(self, name):
        spec = catalog.get(name)
        for x in sample_points(spec, 2, seed=3):
            res = check_warped_lemma(spec, x)
            assert res and max(res.values()) < 1e-5

    def test_skips_simple_clusters(self):
        spec = catalog.get("cone-clifford?n=3")
        x = sample_points(spec, 1, seed=0)[0]
        assert check_warped_lemma(spec, x) == {}


class TestCondM:
    @pytest.mark.parametrize("r", [0.5, np.sqrt(0.5), 0.8])
    def test_clifford_torus(self, r):
        res = check_cond_m(catalog.clifford_torus(r), (0.3, 2.1), 4)
        assert res.residual_i < 1e-10 and res.residual_ii < 1e-10
        assert res.K == pytest.approx(0.0, abs=1e-12)

    def test_minimal_clifford_torus_mu(self):
        res = check_cond_m(catalog.clifford_torus(np.sqrt(0.5)), (0.3, 2.1), 4)
        assert res.mu == pytest.approx(np.sqrt(8 / 3), rel=1e-12)

    def test_generic_surface_fails(self):
        res = check_cond_m(catalog.torus_of_revolution(), (0.3, 1.1), 4)
        assert max(res.residual_i, res.residual_ii) > 1e-3

    def test_non_real_mu(self):
        # totally umbilic great sphere: 4H^2 - 2n/(n-1) (K - c) = 0
        great = SurfaceSpec("great-sphere", 1, ((-1, 1), (-1, 1)), lambda x: tuple(catalog.sphere_chart(x)) + (0.0,))
        with pytest.raises(NonRealMu):
            check_cond_m(great, (0.1, 0.2), 4)


def test_routes_agree_on_negative_control():
    spec = catalog.get("graph")
    x = sample_points(spec, 1, seed=0)[0]
    md = moebius_data(moebius_field(evaluate_jet(spec, x)))
    rep = cluster_spectrum(md.lambda_bar, md.theta)
    v = verdict(semiparallel_direct(md.R_star, md.B, md.gs), semiparallel_spectral(rep))
    assert v.verdict == Verdict.NOT_SEMI_PARALLEL
