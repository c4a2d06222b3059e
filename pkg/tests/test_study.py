"""Ensemble-driver tests.

The expensive pipeline is exercised once per module on a coarse grid; the
algebraic pieces (sign counting, classification, config plumbing, output
emission) are tested directly.
"""

import dataclasses
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lagdeconv.groundwater import CovarianceConfig, DomainConfig
from lagdeconv.laguerre import LaguerreSeries, TimeSeries
from lagdeconv.study import (
    RECORD_COLUMNS,
    StudyConfig,
    StudyRecord,
    StudySummary,
    classify_bifurcation,
    config_from_flat,
    count_sign_changes,
    desk_config,
    emit_outputs,
    flat_defaults,
    load_config,
    paper_config,
    reconstruct_boundary,
    run_study,
    summarize,
)

SMALL_DOMAIN = DomainConfig(nx=30, ny=12, dt=0.1, t_end=250.0)


def small_config(**overrides):
    base = dict(realizations=6, laguerre_terms=20, kle_terms=12,
                domain=SMALL_DOMAIN, workers=1)
    base.update(overrides)
    return StudyConfig(**base)


@pytest.fixture(scope="module")
def small_run():
    cfg = small_config()
    records, summary = run_study(cfg)
    return cfg, records, summary


def mk_record(seed, peak_class, sign_changes, rel=0.5, upper=1.0):
    peak_true = 1.0 if peak_class == "early" else 3.0
    return StudyRecord(
        seed=seed, abs_error=rel, rel_error=rel, lower_k1=0.1, lower_k2=0.2,
        upper=upper, b0=0.02, b0_tilde=0.017, peak_time_true=peak_true,
        peak_time_model=2.0, peak_class=peak_class, sign_changes=sign_changes,
        recon_peak_time=0.0, a_hat=np.zeros(3))


class TestStudyConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            StudyConfig(realizations=0)
        with pytest.raises(ValueError):
            StudyConfig(estimator="ridge")
        with pytest.raises(ValueError):
            StudyConfig(amplitude=0.0)
        with pytest.raises(ValueError):
            StudyConfig(scale_T=-1.0)
        with pytest.raises(ValueError):
            StudyConfig(workers=0)

    def test_kle_terms_drives_covariance(self):
        cfg = StudyConfig(kle_terms=7)
        assert cfg.covariance.n_terms == 7
        cfg = StudyConfig(kle_terms=5, covariance=CovarianceConfig(n_terms=99))
        assert cfg.covariance.n_terms == 5

    def test_recon_grid(self):
        g = StudyConfig(scale_T=50.0).recon_grid
        assert g.shape == (400,)
        assert g[0] == 0.0 and g[-1] == 200.0

    def test_presets(self):
        desk = desk_config()
        assert (desk.realizations, desk.domain.nx, desk.domain.dt) == (50, 50, 0.1)
        full = paper_config()
        assert (full.realizations, full.domain.nx, full.domain.dt) == (500, 100, 0.05)
        assert desk_config(realizations=3).realizations == 3


class TestReconstructBoundary:
    def test_basis_member(self):
        t = np.linspace(0.0, 400.0, 100)
        s = LaguerreSeries(coeffs=[1.0, 0.0, 0.0], scale=100.0)
        out = reconstruct_boundary(s, t)
        assert_allclose(out.values, np.exp(-t / 200.0), atol=1e-14)

    def test_value_at_zero_is_coeff_sum(self):
        coeffs = [0.3, -0.7, 1.1, 0.2]
        s = LaguerreSeries(coeffs=coeffs, scale=10.0)
        out = reconstruct_boundary(s, [0.0, 1.0])
        assert out.values[0] == pytest.approx(sum(coeffs), rel=1e-14)

    def test_grid_validation(self):
        s = LaguerreSeries(coeffs=[1.0], scale=1.0)
        with pytest.raises(ValueError):
            reconstruct_boundary(s, [1.0, 0.5])
        with pytest.raises(ValueError):
            reconstruct_boundary(s, [-1.0, 0.0])
        with pytest.raises(ValueError):
            reconstruct_boundary(s, [1.0])


class TestCountSignChanges:
    def test_strictly_positive_series(self):
        t = np.linspace(0, 1, 50)
        assert count_sign_changes(0.5 + 0.4 * np.sin(9 * t)) == 0

    def test_alternating(self):
        assert count_sign_changes([1.0, -1.0, 1.0, -1.0]) == 3

    def test_dead_band_suppresses_roundoff(self):
        v = np.ones(20)
        v[5], v[11] = -1e-9, -1e-12  # inside the 1e-3 dead band
        assert count_sign_changes(v) == 0
        v[5] = -0.5
        assert count_sign_changes(v) == 2

    def test_all_zero(self):
        assert count_sign_changes(np.zeros(10)) == 0
        assert count_sign_changes([]) == 0

    def test_custom_band(self):
        v = np.array([1.0, -0.01, 1.0])
        assert count_sign_changes(v, dead_band_factor=1e-3) == 2
        assert count_sign_changes(v, dead_band_factor=0.1) == 0


class TestClassifyBifurcation:
    def test_hand_set_medians(self):
        records = ([mk_record(i, "early", sc) for i, sc in enumerate([2, 4, 6, 1, 3])]
                   + [mk_record(10 + i, "late", sc) for i, sc in enumerate([0, 1, 0, 2, 0])])
        out = classify_bifurcation(records)
        assert out["classes"]["early"]["median_sign_changes"] == 3.0
        assert out["classes"]["late"]["median_sign_changes"] == 0.0
        assert not out["classes"]["early"]["low_confidence"]
        assert out["diagnostic_applicable"] is True
        assert out["oscillation_diagnostic"] is True

    def test_low_confidence_small_class(self):
        records = [mk_record(0, "early", 5), mk_record(1, "late", 0)]
        out = classify_bifurcation(records)
        assert out["classes"]["early"]["low_confidence"]
        assert out["classes"]["late"]["low_confidence"]

    def test_single_class_not_applicable(self):
        records = [mk_record(i, "late", 0) for i in range(6)]
        out = classify_bifurcation(records)
        assert out["diagnostic_applicable"] is False
        assert out["oscillation_diagnostic"] is None
        assert "early" not in out["classes"]


class TestRecordValidation:
    def test_class_must_match_peaks(self):
        with pytest.raises(ValueError):
            StudyRecord(seed=0, abs_error=1.0, rel_error=1.0, lower_k1=0.0,
                        lower_k2=0.0, upper=1.0, b0=1.0, b0_tilde=1.0,
                        peak_time_true=5.0, peak_time_model=2.0,
                        peak_class="early", sign_changes=0,
                        recon_peak_time=0.0, a_hat=np.zeros(2))

    def test_violation_predicate(self):
        good = mk_record(0, "early", 0, rel=0.5, upper=1.0)
        assert not good.violates_bounds()
        bad = mk_record(1, "early", 0, rel=0.5, upper=0.4)
        assert bad.violates_bounds()


class TestRunStudy:
    def test_seed_order_and_counts(self, small_run):
        cfg, records, summary = small_run
        assert [r.seed for r in records] == list(range(6))
        assert summary.total == 6 and summary.exclusions == 0
        assert summary.violations == 0

    def test_sandwich_holds(self, small_run):
        _, records, _ = small_run
        for r in records:
            assert r.lower_k1 <= r.lower_k2 + 1e-8
            assert r.lower_k2 <= r.rel_error + 1e-8
            assert r.rel_error <= r.upper + 1e-6

    def test_deterministic(self, small_run):
        cfg, records, _ = small_run
        again, _ = run_study(small_config())
        for a, b in zip(records, again):
            assert a == b
            assert np.array_equal(a.a_hat, b.a_hat)

    def test_estimator_consistency_single_location(self, small_run):
        cfg, records, _ = small_run
        lsq_records, _ = run_study(small_config(estimator="least_squares"))
        for a, b in zip(records, lsq_records):
            assert b.rel_error == pytest.approx(a.rel_error, abs=1e-8)
            assert np.allclose(a.a_hat, b.a_hat, atol=1e-8)
            assert (a.peak_class, a.sign_changes) == (b.peak_class, b.sign_changes)

    def test_amplitude_scale_invariance(self, small_run):
        cfg, records, _ = small_run
        scaled, _ = run_study(small_config(amplitude=3.0))
        for a, b in zip(records, scaled):
            assert b.abs_error == pytest.approx(3.0 * a.abs_error, rel=1e-8)
            assert b.rel_error == pytest.approx(a.rel_error, rel=1e-8)
            assert (a.peak_class, a.sign_changes) == (b.peak_class, b.sign_changes)

    def test_zero_variance_limit(self):
        cfg = small_config(realizations=4,
                           covariance=CovarianceConfig(variance=0.0))
        records, summary = run_study(cfg)
        for r in records:
            assert r.rel_error < 1e-6
            assert max(r.lower_k1, r.lower_k2, r.upper) < 1e-10
            assert r.peak_class == "late"  # ties classify as late
            assert r.sign_changes == 0
        assert summary.class_stats["diagnostic_applicable"] is False

    def test_worker_pool_matches_serial(self, small_run):
        cfg, records, _ = small_run
        parallel, _ = run_study(small_config(realizations=4, workers=2))
        for a, b in zip(records, parallel):
            assert a == b


class TestSummarize:
    def test_histogram_sums(self, small_run):
        _, records, summary = small_run
        assert sum(summary.histogram_counts) == summary.total
        assert len(summary.histogram_edges) == len(summary.histogram_counts) + 1
        assert set(summary.quantiles) == {"p05", "p25", "p50", "p75", "p95"}
        assert summary.quantiles["p05"] <= summary.quantiles["p50"] <= summary.quantiles["p95"]

    def test_violation_count(self):
        records = [mk_record(0, "early", 0, rel=0.5, upper=0.4),
                   mk_record(1, "early", 0, rel=0.5, upper=1.0)]
        s = summarize(records)
        assert s.violations == 1

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize([])

    def test_summary_invariants(self):
        with pytest.raises(ValueError):
            StudySummary(total=2, exclusions=1, failures=(), violations=0,
                         quantiles={}, histogram_edges=(0.0, 1.0),
                         histogram_counts=(2,), class_stats={})


class TestConfigPlumbing:
    def test_flat_defaults_presets(self):
        desk = flat_defaults()
        assert (desk["realizations"], desk["nx"]) == (50, 50)
        full = flat_defaults(paper=True)
        assert (full["realizations"], full["nx"]) == (500, 100)

    def test_config_from_flat_roundtrip(self):
        flat = flat_defaults()
        flat.update(realizations=3, nx=30, ny=12, t_end=250.0, kle_terms=12,
                    estimator="lsq", output_dir="/tmp/x")
        cfg = config_from_flat(flat)
        assert cfg.realizations == 3
        assert cfg.domain.nx == 30
        assert cfg.covariance.n_terms == 12
        assert cfg.estimator == "least_squares"
        assert cfg.output_dir == "/tmp/x"

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config key"):
            config_from_flat({"realisations": 5})

    def test_load_config(self, tmp_path):
        p = tmp_path / "study.cfg"
        p.write_text(
            "# ensemble size\n"
            "realizations = 7\n"
            "\n"
            "estimator=lsq\n"
            "variance = 1.5   # reduced heterogeneity\n"
            "nx=30\n")
        flat = load_config(p)
        assert flat == {"realizations": 7, "estimator": "lsq",
                        "variance": 1.5, "nx": 30}

    def test_load_config_errors(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("realizations 7\n")
        with pytest.raises(ValueError, match="key = value"):
            load_config(p)
        p.write_text("wibble = 3\n")
        with pytest.raises(ValueError, match="unknown config key"):
            load_config(p)


class TestEmitOutputs:
    def test_files_and_determinism(self, small_run, tmp_path):
        cfg, records, summary = small_run
        cfg_out = dataclasses.replace(cfg, output_dir=str(tmp_path / "run"))
        paths = emit_outputs(records, summary, cfg_out)
        for key in ("records", "summary", "histogram", "bound_scatter", "schema"):
            assert paths[key].is_file()

        lines = paths["records"].read_text().strip().split("\n")
        assert lines[0] == ",".join(RECORD_COLUMNS)
        assert len(lines) == 1 + len(records)

        first = paths["records"].read_bytes()
        emit_outputs(records, summary, cfg_out)
        assert paths["records"].read_bytes() == first

        payload = json.loads(paths["summary"].read_text())
        assert payload["total"] == summary.total
        assert payload["violations"] == 0
        assert sum(payload["histogram"]["counts"]) == summary.total
        assert payload["config"]["realizations"] == cfg.realizations

        hist = paths["histogram"].read_text().strip().split("\n")
        assert hist[0] == "bin_left,bin_right,count"
        assert sum(int(row.rsplit(",", 1)[1]) for row in hist[1:]) == summary.total

    def test_reconstruction_files_roundtrip(self, small_run, tmp_path):
        cfg, records, summary = small_run
        cfg_out = dataclasses.replace(cfg, output_dir=str(tmp_path / "run2"))
        emit_outputs(records, summary, cfg_out)
        r = records[0]
        series = TimeSeries.from_csv(tmp_path / "run2" / "reconstructions" / f"{r.seed}.csv")
        expected = reconstruct_boundary(
            LaguerreSeries(coeffs=r.a_hat, scale=cfg.scale_T), cfg.recon_grid)
        assert_allclose(series.values, expected.values, rtol=0, atol=0)

    def test_requires_output_dir(self, small_run):
        cfg, records, summary = small_run
        with pytest.raises(ValueError, match="output_dir"):
            emit_outputs(records, summary, cfg)
