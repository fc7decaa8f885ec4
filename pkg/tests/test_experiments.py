"""Growth pipeline, trial functions, and the inequality verifiers."""

import math

import numpy as np
import pytest

import steklov.experiments as experiments
from steklov.build import build_flat_cylinder, glue_surface
from steklov.errors import InsufficientRecords, InvalidParams, RunInvariantViolated
from steklov.experiments import (
    GrowthRecord,
    GrowthRunConfig,
    RECORD_COLUMNS,
    boundary_means,
    check_kokarev,
    collar_sloshing_mu,
    comparison_ratio_report,
    doubled_piece_lambda1,
    growth_slope,
    run_growth,
    trial_function,
    trial_function_quotient,
    verify_global_estimate,
    verify_local_estimate,
)
from steklov.graphs import circulant_graph, laplacian_spectrum, quadratic_form
from steklov.spectra import BoundaryCondition, EigenOptions, sloshing_mu1, steklov_spectrum


@pytest.fixture(scope="module")
def small_surface(piece_small):
    g = circulant_graph(6, (1, 2))
    surface = glue_surface(piece_small, g)
    spectrum = steklov_spectrum(surface.mesh, EigenOptions(n_eigs=6))
    f = spectrum.extensions[:, spectrum.n_zero_modes]
    return surface, g, spectrum, f


def make_record(**overrides):
    base = dict(
        n=8, lambda1_graph=2.0, sigma1=0.4, l_boundary=8.0, sigma1_times_l=3.2,
        genus=9, ratio=0.2, kokarev_bound=8 * math.pi * 10, trial_quotient=1.0,
        mu_collar=8.0, c_emp=4.0, lower_bound=0.1, local_margin=0.05,
        global_margin=0.004, residual_max=1e-14,
    )
    base.update(overrides)
    return GrowthRecord(**base)


class TestConfig:
    def test_rejects_bad_sizes(self):
        with pytest.raises(InvalidParams):
            GrowthRunConfig(sizes=())
        with pytest.raises(InvalidParams):
            GrowthRunConfig(sizes=(8, 8))
        with pytest.raises(InvalidParams):
            GrowthRunConfig(sizes=(12, 8))
        with pytest.raises(InvalidParams):
            GrowthRunConfig(sizes=(7,), k=3)  # odd n*k

    def test_rejects_bad_scalars(self):
        with pytest.raises(InvalidParams):
            GrowthRunConfig(sizes=(8,), gap_threshold=0.0)
        with pytest.raises(InvalidParams):
            GrowthRunConfig(sizes=(8,), jobs=0)

    def test_config_echo_keys(self):
        cfg = GrowthRunConfig(sizes=(8, 12))
        echo = cfg.to_dict()
        assert echo["sizes"] == [8, 12]
        assert "jobs" not in echo  # execution detail, not a scientific knob
        assert set(echo) == {
            "k", "sizes", "gap_threshold", "n_b", "resolution", "seed",
            "n_eigs", "tol_res", "max_iterations", "dense_fallback_threshold",
        }


class TestTrialFunction:
    def test_field_support_and_values(self, small_surface):
        surface, g, _, _ = small_surface
        x = laplacian_spectrum(g).fiedler_vector
        f = trial_function(surface, x)
        rows = surface.collar_maps.shape[1]
        for v in range(surface.n_copies):
            grid = surface.collar_maps[v]
            assert np.allclose(f[grid[0]], x[v])
            assert np.allclose(f[grid[rows - 1]], 0.0)
        support = set(np.nonzero(f)[0])
        collar = set(surface.collar_maps.reshape(-1).tolist())
        assert support <= collar

    def test_quotient_is_one_on_unit_collars(self, small_surface):
        # the linear decay is the exact harmonic profile on a flat unit
        # collar, and each sigma loop has length 1: quotient == 1
        surface, g, _, _ = small_surface
        x = laplacian_spectrum(g).fiedler_vector
        assert trial_function_quotient(surface, x) == pytest.approx(1.0, abs=1e-12)

    def test_quotient_upper_bounds_sigma1(self, small_surface):
        surface, g, spectrum, _ = small_surface
        x = laplacian_spectrum(g).fiedler_vector
        assert spectrum.sigma1 <= trial_function_quotient(surface, x) + 1e-8

    def test_requires_sum_zero(self, small_surface):
        surface, _, _, _ = small_surface
        with pytest.raises(InvalidParams):
            trial_function_quotient(surface, np.ones(surface.n_copies))

    def test_shape_check(self, small_surface):
        surface, _, _, _ = small_surface
        with pytest.raises(InvalidParams):
            trial_function(surface, np.zeros(surface.n_copies + 1))


class TestBoundaryMeans:
    def test_constant_field(self, small_surface):
        surface, _, _, _ = small_surface
        x = boundary_means(surface, np.ones(surface.mesh.n_vertices))
        # each loop has length 1, so the mean of 1 is 1
        assert np.allclose(x, 1.0, atol=1e-12)

    def test_eigenfunction_means_sum_to_zero(self, small_surface):
        surface, _, _, f = small_surface
        x = boundary_means(surface, f)
        assert abs(x.sum()) < 1e-10 * max(1.0, np.abs(x).max())


class TestLocalEstimate:
    def test_margin_and_exactness(self, small_surface):
        surface, _, _, f = small_surface
        mu = collar_sloshing_mu(surface.piece)
        report = verify_local_estimate(surface, f, mu)
        assert report.mu == mu
        assert report.margin >= -1e-6
        assert report.fluct_boundary_sq <= report.bound
        assert report.max_ring_mean_residual <= 1e-10
        assert report.max_decomposition_rel_err <= 1e-8

    def test_mu_computed_when_missing(self, small_surface):
        surface, _, _, f = small_surface
        auto = verify_local_estimate(surface, f)
        assert auto.mu == pytest.approx(collar_sloshing_mu(surface.piece), rel=1e-12)

    def test_collar_mu_matches_standalone_cylinder(self, piece_small):
        cyl = build_flat_cylinder(piece_small.n_b, piece_small.resolution, 1.0, 1.0)
        direct = sloshing_mu1(cyl, BoundaryCondition.one_steklov(cyl, "bottom"),
                              EigenOptions())
        assert collar_sloshing_mu(piece_small) == pytest.approx(direct, rel=1e-12)


class TestGlobalEstimate:
    def test_report_contents(self, small_surface):
        surface, g, _, f = small_surface
        report = verify_global_estimate(surface, g, f)
        assert len(report.per_edge_ratios) == g.n_edges
        assert report.c_emp == max(report.per_edge_ratios)
        assert abs(report.sum_x) < 1e-10
        assert report.global_margin >= -1e-9
        assert np.allclose(report.x, boundary_means(surface, f))
        assert report.q_gamma == pytest.approx(
            quadratic_form(g, np.asarray(report.x)), rel=1e-12
        )
        # exact split of the boundary norm: ||f||^2 = ||x||^2 + ||f - x||^2
        x = np.asarray(report.x)
        assert report.boundary_sq == pytest.approx(
            float(x @ x) + report.fluct_sq, rel=1e-9
        )

    def test_constant_field_trivial(self, small_surface):
        surface, g, _, _ = small_surface
        report = verify_global_estimate(surface, g, np.full(surface.mesh.n_vertices, 3.0))
        assert report.q_gamma == 0.0
        assert report.c_emp == 0.0


class TestRecordsAndReports:
    def test_kokarev(self):
        assert check_kokarev(make_record())
        assert not check_kokarev(make_record(sigma1_times_l=1e4))

    def test_slope(self):
        recs = [make_record(n=8, sigma1_times_l=3.0), make_record(n=16, sigma1_times_l=5.0)]
        assert growth_slope(recs) == pytest.approx(0.25)
        with pytest.raises(InsufficientRecords):
            growth_slope(recs[:1])

    def test_ratio_report(self):
        recs = [make_record(n=8, ratio=0.2), make_record(n=16, ratio=0.3)]
        rep = comparison_ratio_report(recs)
        assert rep.alpha_hat == 0.2 and rep.beta_hat == 0.3
        assert rep.spread == pytest.approx(1.5)
        assert rep.ratios == ((8, 0.2), (16, 0.3))
        with pytest.raises(InsufficientRecords):
            comparison_ratio_report(recs[:1])

    def test_record_columns_exclude_timings(self):
        assert "timings" not in RECORD_COLUMNS
        assert RECORD_COLUMNS[0] == "n"


class TestRunGrowth:
    def test_small_run_invariants_and_determinism(self):
        cfg = GrowthRunConfig(sizes=(6, 8), k=4, n_b=8, resolution=2, seed=7)
        records = run_growth(cfg)
        assert [r.n for r in records] == [6, 8]
        for r in records:
            assert r.lower_bound - 1e-6 <= r.sigma1 <= r.trial_quotient + 1e-8
            assert r.local_margin >= -1e-6
            assert r.global_margin >= -1e-9
            assert r.genus == 1 + r.n
            assert r.mu_collar == records[0].mu_collar
        again = run_growth(cfg)
        assert again == records  # timings excluded from equality

    def test_jobs_do_not_change_records(self):
        base = GrowthRunConfig(sizes=(6, 8), k=4, n_b=8, resolution=2, seed=7)
        parallel = GrowthRunConfig(sizes=(6, 8), k=4, n_b=8, resolution=2, seed=7, jobs=2)
        assert run_growth(parallel) == run_growth(base)

    def test_partial_records_attached_on_abort(self, monkeypatch):
        original = experiments._check_record

        def failing(record, config):
            if record.n == 8:
                raise RunInvariantViolated("injected failure")
            original(record, config)

        monkeypatch.setattr(experiments, "_check_record", failing)
        cfg = GrowthRunConfig(sizes=(6, 8), k=4, n_b=8, resolution=2, seed=7)
        with pytest.raises(RunInvariantViolated) as err:
            run_growth(cfg)
        assert [r.n for r in err.value.records] == [6]


def test_doubled_piece_lambda1_positive(piece_small):
    lam = doubled_piece_lambda1(piece_small, EigenOptions())
    assert lam > 0
