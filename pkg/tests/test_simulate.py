import dataclasses
import json
import math

import numpy as np
import pytest

from rdwo.core import EstimatorConfig, Sample, batch_weights
from rdwo.simulate import (
    Atan,
    ExperimentSpec,
    NoisySample,
    PiecewiseLinear,
    Sine,
    error_bound,
    generate_dataset,
    lipschitz_scan,
    load_spec,
    max_relative_deviation,
    run_experiment,
)


def small_spec(**overrides):
    base = dict(
        function=Sine(amplitude=1.0, frequency=1.0),
        config=EstimatorConfig(delta=0.5, l1=1.0),
        input_range=(-3.0, 3.0),
        noise_sigma=0.1,
        n_samples=400,
        seed=5,
        query_grid=tuple(np.linspace(-2.5, 2.5, 11)),
    )
    base.update(overrides)
    return ExperimentSpec(**base)


class TestTargetFunctions:
    def test_sine_slope_bound(self):
        assert Sine(amplitude=2.0, frequency=3.0).l1 == 6.0

    def test_sine_values(self):
        fn = Sine(amplitude=2.0, frequency=0.5)
        grid = np.array([0.0, 1.0, -2.0])
        np.testing.assert_allclose(fn(grid), 2.0 * np.sin(0.5 * grid))

    def test_atan(self):
        fn = Atan(scale=3.0)
        assert fn.l1 == 3.0
        assert math.isclose(float(fn(2.0)), math.atan(6.0), rel_tol=1e-15)

    def test_piecewise_linear(self):
        fn = PiecewiseLinear(knots=((-1.0, 0.0), (0.0, 2.0), (2.0, 1.0)))
        assert fn.l1 == 2.0
        assert float(fn(-0.5)) == 1.0
        assert float(fn(1.0)) == 1.5
        # clamped outside the knots
        assert float(fn(-5.0)) == 0.0
        assert float(fn(9.0)) == 1.0

    def test_piecewise_linear_validation(self):
        with pytest.raises(ValueError):
            PiecewiseLinear(knots=((0.0, 1.0),))
        with pytest.raises(ValueError):
            PiecewiseLinear(knots=((1.0, 0.0), (0.0, 1.0)))

    def test_lipschitz_scan_brackets_sine(self):
        scan = lipschitz_scan(Sine(1.0, 1.0), -3.0, 3.0)
        assert 0.99 <= scan <= 1.0 + 1e-9

    def test_lipschitz_scan_bad_range(self):
        with pytest.raises(ValueError):
            lipschitz_scan(Sine(), 1.0, 1.0)


class TestNoisySample:
    def test_exact_decomposition_accepted(self):
        truth, noise = 0.7, -0.2
        ns = NoisySample(sample=Sample(1, 0.0, truth + noise), truth=truth, noise=noise)
        assert ns.sample.y == truth + noise

    def test_inexact_decomposition_rejected(self):
        with pytest.raises(ValueError):
            NoisySample(sample=Sample(1, 0.0, 0.5000001), truth=0.7, noise=-0.2)


class TestExperimentSpec:
    def test_valid_spec_roundtrips(self):
        spec = small_spec()
        again = ExperimentSpec.from_dict(spec.to_dict())
        assert again == spec

    def test_grid_shorthand(self):
        data = small_spec().to_dict()
        data["query_grid"] = {"min": -1.0, "max": 1.0, "count": 5}
        spec = ExperimentSpec.from_dict(data)
        assert spec.query_grid == (-1.0, -0.5, 0.0, 0.5, 1.0)

    def test_rejects_negative_noise(self):
        with pytest.raises(ValueError):
            small_spec(noise_sigma=-0.1)

    def test_rejects_empty_grid(self):
        with pytest.raises(ValueError):
            small_spec(query_grid=())

    def test_rejects_undersized_l1(self):
        with pytest.raises(ValueError, match="dominate"):
            small_spec(config=EstimatorConfig(delta=0.5, l1=0.5))

    def test_rejects_bad_range(self):
        with pytest.raises(ValueError):
            small_spec(input_range=(2.0, 2.0))

    def test_load_spec(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(small_spec().to_dict()), encoding="utf-8")
        assert load_spec(path) == small_spec()

    def test_load_spec_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ValueError, match="invalid JSON"):
            load_spec(path)

    def test_load_spec_missing_field(self, tmp_path):
        data = small_spec().to_dict()
        del data["n_samples"]
        path = tmp_path / "missing.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(ValueError, match="n_samples"):
            load_spec(path)


class TestGenerateDataset:
    def test_deterministic_and_well_formed(self):
        spec = small_spec(n_samples=100)
        a = generate_dataset(spec)
        b = generate_dataset(spec)
        assert a == b
        assert len(a) == 100
        lo, hi = spec.input_range
        for k, ns in enumerate(a, start=1):
            assert ns.sample.index == k
            assert lo <= ns.sample.phi <= hi
            assert ns.sample.y == ns.truth + ns.noise

    def test_noiseless_dataset(self):
        spec = small_spec(noise_sigma=0.0, n_samples=50)
        for ns in generate_dataset(spec):
            assert ns.noise == 0.0
            assert ns.sample.y == ns.truth


class TestErrorBound:
    def test_matches_plain_arithmetic(self):
        spec = small_spec(n_samples=60)
        data = generate_dataset(spec)
        samples = [ns.sample for ns in data]
        x = 0.4
        sol = batch_weights(x, samples, spec.config)
        z = error_bound(sol, x, data, spec.config)
        smooth = math.fsum(
            w * abs(x - ns.sample.phi) for w, ns in zip(sol.weights, data)
        )
        noise = math.fsum(w * ns.noise for w, ns in zip(sol.weights, data))
        expected = spec.config.l1 * smooth + abs(noise)
        assert math.isclose(z, expected, rel_tol=1e-12)

    def test_length_mismatch_rejected(self):
        spec = small_spec(n_samples=10)
        data = generate_dataset(spec)
        sol = batch_weights(0.0, [ns.sample for ns in data], spec.config)
        with pytest.raises(ValueError):
            error_bound(sol, 0.0, data[:5], spec.config)


class TestRunExperiment:
    def test_batch_report_shape(self):
        report = run_experiment(small_spec(), "batch")
        assert report.mode == "batch"
        assert len(report.records) == 11
        assert report.supported_count + report.no_support_count == 11
        assert report.violation_count == 0
        for r in report.records:
            if r.estimate is None:
                assert r.abs_error is None and r.bound_z is None
                assert r.active_count == 0
            else:
                assert math.isclose(r.abs_error, abs(r.estimate - r.truth))
                assert r.bound_holds
                assert r.active_count > 0

    def test_modes_agree(self):
        spec = small_spec(n_samples=2000)
        batch = run_experiment(spec, "batch")
        streaming = run_experiment(spec, "streaming")
        assert max_relative_deviation(batch, streaming) <= 1e-10
        assert streaming.mode == "streaming"

    def test_unsupported_queries_reported(self):
        spec = small_spec(query_grid=(0.0, 50.0))
        report = run_experiment(spec, "batch")
        assert report.records[1].estimate is None
        assert report.no_support_count == 1

    def test_noiseless_errors_capped_by_window(self):
        spec = small_spec(noise_sigma=0.0, n_samples=5000, seed=11)
        report = run_experiment(spec, "batch")
        cap = spec.config.l1 * spec.config.delta
        assert report.supported_count > 0
        assert report.max_abs_error <= cap
        for r in report.records:
            if r.bound_z is not None:
                assert r.bound_z <= cap

    def test_bad_mode_rejected(self):
        with pytest.raises(ValueError):
            run_experiment(small_spec(), "online")

    def test_report_to_dict(self):
        report = run_experiment(small_spec(), "batch")
        data = report.to_dict()
        assert data["mode"] == "batch"
        assert len(data["records"]) == len(report.records)
        assert data["violation_count"] == 0

    def test_error_shrinks_with_more_data(self):
        # Monte Carlo stand-in for the asymptotic accuracy claim: averaged
        # over 100 seeds, 1e5 samples must beat 1e2 samples.
        small_means = []
        large_means = []
        grid = tuple(np.linspace(-2.0, 2.0, 9))
        for seed in range(100):
            for n, sink in ((100, small_means), (100_000, large_means)):
                spec = small_spec(
                    n_samples=n, seed=seed, query_grid=grid,
                    config=EstimatorConfig(delta=0.25, l1=1.0),
                )
                report = run_experiment(spec, "batch")
                if report.mean_abs_error is not None:
                    sink.append(report.mean_abs_error)
        assert np.mean(large_means) < np.mean(small_means)


class TestMaxRelativeDeviation:
    def test_zero_for_identical_reports(self):
        report = run_experiment(small_spec(), "batch")
        assert max_relative_deviation(report, report) == 0.0

    def test_mismatched_grids_rejected(self):
        a = run_experiment(small_spec(), "batch")
        b = run_experiment(small_spec(query_grid=(0.0,)), "batch")
        with pytest.raises(ValueError):
            max_relative_deviation(a, b)
