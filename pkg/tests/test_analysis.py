import numpy as np
import pytest

from splinet.analysis import convergence, stability
from splinet.analysis.convergence import convergence_study, fit_order, reference_solution
from splinet.analysis.stability import (grid_for_step_size, in_stability_disk, scan_frame, spectrum_scan,
                                        stability_spectrum)
from splinet.analysis.statistics import summarize, summarize_by, summarize_values
from splinet.analysis.sweep import Sweep, run_config, sample_hyperparameters
from splinet.architecture.control import ControlParams, TimeGrid, init_random, materialize
from splinet.architecture.dynamics import Activation, scaled_jacobian
from splinet.trainer import RunRecord
from splinet.utils.config import SweepRanges
from splinet.utils.errors import DimensionError
from splinet.utils.linalg import eigenvalues


class TestConvergence:
    def test_first_order(self, tanh):
        params = init_random('splinet', 4, seed=7, amplitude=1.0, n_intervals=10, degree=2)
        report = convergence_study(params, np.full(4, 0.5), (25, 50, 100, 200, 400, 800), tanh)
        assert 0.9 <= report.slope <= 1.1
        assert 1.8 <= report.error_ratios()[-1] <= 2.2
        np.testing.assert_array_equal(report.n_steps, [25, 50, 100, 200, 400, 800])
        assert np.all(np.diff(report.step_sizes) < 0)

    def test_zero_control(self, tanh):
        params = ControlParams(kind='splinet', omega=np.zeros((4, 3, 3)), beta=np.zeros((4, 3)),
                               n_intervals=3, degree=1)
        report = convergence_study(params, np.array([0.1, 0.2, 0.3]), (10, 20, 40), tanh, reference_step=1e-3)
        np.testing.assert_array_equal(report.errors, np.zeros(3))
        assert np.isnan(report.slope)
        assert report.to_dict()['slope'] is None

    def test_per_layer_rejected(self, tanh):
        params = init_random('per_layer', 3, seed=0, amplitude=0.1, n_intervals=10)
        with pytest.raises(DimensionError):
            convergence_study(params, np.zeros(3), (10, 20), tanh)

    def test_needs_two_step_counts(self, small_spline, tanh):
        with pytest.raises(ValueError):
            convergence_study(small_spline, np.zeros(4), (10, 10), tanh)

    def test_reference_of_constant_field(self):
        # W = 0, b = 1, identity: x(1) = x0 + λ
        params = ControlParams(kind='splinet', omega=np.zeros((3, 2, 2)), beta=np.ones((3, 2)),
                               n_intervals=2, degree=1, time_scale=2.0)
        x = reference_solution(params, np.array([1.0, -1.0]), Activation('identity'), reference_step=1e-2)
        np.testing.assert_allclose(x, [3.0, 1.0], atol=1e-13)

    def test_reference_evaluates_control_at_every_stage(self, monkeypatch, small_spline, tanh):
        times = []

        def recording_materialize(params, basis, t):
            times.append(t)
            return materialize(params, basis, t)

        monkeypatch.setattr(convergence, 'materialize', recording_materialize)
        reference_solution(small_spline, np.zeros(4), tanh, reference_step=0.1)
        np.testing.assert_allclose(times, np.arange(21) / 20, rtol=0, atol=1e-15)

    def test_fit_order(self):
        h = np.array([0.1, 0.05, 0.025])
        assert fit_order(h, 3.0 * h ** 2) == pytest.approx(2.0)
        assert np.isnan(fit_order(h, [1.0, 0.0, 1.0]))

    def test_frame(self, tanh, small_spline):
        report = convergence_study(small_spline, np.zeros(4), (10, 20), tanh, reference_step=1e-3)
        assert list(report.to_frame().columns) == ['h', 'N', 'error']


class TestStability:
    def test_antisymmetric_identity_spectrum(self):
        params = init_random('splinet', 4, seed=5, amplitude=1.0, n_intervals=5, degree=1, antisymmetric=True,
                             gamma_shift=0.1)
        report = stability_spectrum(params, TimeGrid(1000), Activation('identity'), np.ones(4))
        np.testing.assert_allclose(report.unscaled.real, -0.1, rtol=0, atol=1e-9)
        assert report.all_inside
        assert report.fraction_inside == 1.0

    def test_pure_antisymmetric_is_imaginary(self):
        params = init_random('per_layer', 4, seed=5, amplitude=1.0, n_intervals=10, antisymmetric=True)
        report = stability_spectrum(params, TimeGrid(10), Activation('identity'), np.ones(4))
        assert np.max(np.abs(report.unscaled.real)) < 1e-9

    def test_zero_weights(self, tanh):
        params = ControlParams(kind='per_layer', omega=np.zeros((6, 3, 3)), beta=np.ones((6, 3)), n_intervals=6)
        report = stability_spectrum(params, TimeGrid(6), tanh, np.zeros(3))
        np.testing.assert_array_equal(report.scaled, np.zeros((6, 3)))
        assert report.all_inside

    def test_scaling(self, tanh):
        params = init_random('splinet', 4, seed=1, amplitude=1.0, n_intervals=4, degree=2, time_scale=3.0)
        report = stability_spectrum(params, TimeGrid(20), tanh, np.full(4, 0.3))
        np.testing.assert_allclose(report.scaled, 3.0 / 20 * report.unscaled)
        assert report.step_size == 1 / 20

    def test_conjugate_flags(self, tanh):
        params = init_random('splinet', 5, seed=2, amplitude=3.0, n_intervals=6, degree=1)
        report = stability_spectrum(params, TimeGrid.resnet(12), tanh, np.linspace(-1.0, 1.0, 5))
        np.testing.assert_array_equal(in_stability_disk(np.conj(report.scaled)), report.inside)

    def test_disk(self):
        np.testing.assert_array_equal(in_stability_disk(np.array([0.0, -2.0, -1.0 + 1.0j, 0.1, -2.1])),
                                      [True, True, True, False, False])

    def test_layer_spectra_come_from_scaled_jacobian(self, monkeypatch, tanh):
        params = init_random('splinet', 4, seed=5, amplitude=1.0, n_intervals=3, degree=2, time_scale=2.0)
        jacobians = []

        def recording_jacobian(x, W, b, h, time_scale, activation):
            jacobians.append(scaled_jacobian(x, W, b, h, time_scale, activation))
            return jacobians[-1]

        monkeypatch.setattr(stability, 'scaled_jacobian', recording_jacobian)
        report = stability_spectrum(params, TimeGrid(10), tanh, np.full(4, 0.2))
        assert len(jacobians) == 10
        for i, jacobian in enumerate(jacobians):
            np.testing.assert_array_equal(eigenvalues(jacobian), report.unscaled[i])

    def test_grid_for_step_size(self):
        assert grid_for_step_size(0.01).n_steps == 100
        with pytest.raises(ValueError):
            grid_for_step_size(0.03)

    def test_scan(self, tanh):
        params = init_random('splinet', 4, seed=3, amplitude=1.0, n_intervals=4, degree=1)
        reports = spectrum_scan(params, tanh, np.zeros(4))
        assert [r.step_size for r in reports] == [0.04, 0.01, 0.0025]
        frame = scan_frame(reports)
        assert frame['n_eigenvalues'].tolist() == [100, 400, 1600]

    def test_frame_columns(self, tanh, small_spline):
        frame = stability_spectrum(small_spline, TimeGrid(5), tanh, np.zeros(4)).to_frame()
        assert list(frame.columns) == ['layer', 're', 'im', 'inside_disk', 're_unscaled', 'im_unscaled']
        assert len(frame) == 20


def _record(value, metric='loss', diverged=False, **tags):
    return RunRecord(config={}, loss_history=[], train_metric=value, validation_metric=value, diverged=diverged,
                     time_scale=1.0, param_count=1, metric_name=metric, tags=tags)


class TestStatistics:
    def test_all_equal(self):
        stats = summarize_values([2.0] * 6, n_resamples=999)
        assert stats.mean == 2.0
        assert stats.std == 0.0
        assert stats.mean_ci == (2.0, 2.0)
        assert stats.std_ci == (0.0, 0.0)

    def test_two_values(self):
        stats = summarize_values([0.0, 1.0], n_resamples=999)
        assert stats.mean == 0.5
        assert stats.std == pytest.approx(0.7071, abs=1e-4)
        assert stats.mean_ci[0] <= 0.5 <= stats.mean_ci[1]

    def test_order_statistics_and_intervals(self, rng):
        stats = summarize_values(rng.lognormal(size=40), n_resamples=2000, seed=3)
        assert stats.min <= stats.q1 <= stats.median <= stats.q3 <= stats.max
        assert stats.mean_ci[0] <= stats.mean <= stats.mean_ci[1]
        assert stats.std_ci[0] <= stats.std <= stats.std_ci[1]

    def test_seeded(self, rng):
        values = rng.normal(size=20)
        assert summarize_values(values, n_resamples=500, seed=1) == summarize_values(values, n_resamples=500, seed=1)

    def test_too_few_values(self):
        with pytest.raises(ValueError):
            summarize_values([1.0])

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            summarize_values([1.0, np.nan])

    def test_infinite_values(self):
        stats = summarize_values([0.1, 0.2, np.inf])
        assert stats.mean == np.inf
        assert stats.median == 0.2
        assert stats.max == np.inf

    def test_diverged_regression_run_is_infinite(self):
        records = [_record(0.01), _record(0.02), _record(np.nan, diverged=True)]
        stats = summarize(records, n_resamples=999)
        assert stats.n_diverged == 1
        assert stats.max == np.inf
        assert stats.median == 0.02

    def test_diverged_classification_run_scores_zero(self):
        records = [_record(0.9, 'accuracy'), _record(np.nan, 'accuracy', diverged=True)]
        stats = summarize(records, n_resamples=999)
        assert stats.min == 0.0
        assert stats.mean == pytest.approx(0.45)

    def test_mixed_metrics(self):
        with pytest.raises(ValueError, match='mix'):
            summarize([_record(0.1), _record(0.9, 'accuracy')])

    def test_summarize_by(self):
        records = [_record(v, architecture=a, L=L) for v, a, L in
                   [(1.0, 'odenet', 2), (3.0, 'odenet', 2), (2.0, 'odenet', 5), (4.0, 'splinet-d1', 2)]]
        frame = summarize_by(records)
        assert frame[['architecture', 'L']].values.tolist() == [['odenet', 2], ['odenet', 5], ['splinet-d1', 2]]
        assert frame['median'].tolist() == [2.0, 2.0, 4.0]
        assert frame['n'].tolist() == [2, 1, 1]

    def test_to_dict(self):
        document = summarize_values([1.0, 2.0, 3.0], label='odenet', n_resamples=999).to_dict()
        assert document['label'] == 'odenet'
        assert document['mean_ci_low'] <= 2.0 <= document['mean_ci_high']


class TestSampling:
    def test_ranges(self):
        samples = sample_hyperparameters(SweepRanges(), 200, seed=0)
        assert len(samples) == 200
        assert all(1e-3 <= s.eta <= 1e-1 for s in samples)
        assert all(1e-10 <= s.gamma <= 1e-4 for s in samples)
        assert all(1e-3 <= s.init_amplitude <= 1.0 for s in samples)
        assert all(2 <= s.L <= 15 for s in samples)
        assert {s.L for s in samples} == set(range(2, 16))

    def test_seeded(self):
        assert sample_hyperparameters(SweepRanges(), 10, 4) == sample_hyperparameters(SweepRanges(), 10, 4)
        assert sample_hyperparameters(SweepRanges(), 10, 4) != sample_hyperparameters(SweepRanges(), 10, 5)

    def test_log_uniform(self):
        etas = np.array([s.eta for s in sample_hyperparameters(SweepRanges(), 2000, seed=1)])
        # half of a log-uniform sample on [1e-3, 1e-1] lies below 1e-2
        assert 0.45 < np.mean(etas < 1e-2) < 0.55

    def test_needs_runs(self):
        with pytest.raises(ValueError):
            sample_hyperparameters(SweepRanges(), 0, 0)


class TestSweep:
    @pytest.fixture
    def sweep_config(self, sin_config):
        return sin_config.replace(
            training={'epochs': 2},
            sweep={'n_runs': 2, 'seed': 3, 'ranges': {'L': [2, 4]},
                   'architectures': [{'control_kind': 'odenet'}, {'control_kind': 'splinet', 'degree': 1}]})

    def test_run_config(self, sweep_config):
        sample = sample_hyperparameters(sweep_config.sweep.ranges, 3, 0)[2]
        per_layer = run_config(sweep_config, {'control_kind': 'resnet'}, sample, seed=10)
        assert per_layer.network.N == sample.L
        assert per_layer.training.seed == 12
        assert per_layer.training.eta == sample.eta
        spline = run_config(sweep_config, {'control_kind': 'splinet', 'degree': 3}, sample, seed=10)
        assert (spline.network.L, spline.network.degree) == (sample.L, 3)
        assert spline.network.N == sweep_config.network.N

    def test_paired_samples(self, sweep_config):
        sweep = Sweep(sweep_config)
        assert sweep.samples(0) == sweep.samples(1)
        unpaired = Sweep(sweep_config.replace(sweep={'paired': False}))
        assert unpaired.samples(0) != unpaired.samples(1)

    def test_run_and_stats(self, sweep_config):
        sweep = Sweep(sweep_config)
        records = sweep.run()
        assert len(records) == 4
        assert [r.tags['architecture'] for r in records] == ['odenet', 'odenet', 'splinet-d1', 'splinet-d1']
        assert [r.tags['run_index'] for r in records] == [0, 1, 0, 1]
        stats = sweep.stats(n_resamples=999)
        assert [s.label for s in stats] == ['odenet', 'splinet-d1']
        assert all(s.n == 2 for s in stats)

    def test_parallel_matches_serial(self, sweep_config):
        serial = Sweep(sweep_config).run()
        parallel = Sweep(sweep_config, jobs=2).run()
        strip = [{k: v for k, v in r.to_dict().items() if k != 'metadata'} for r in serial]
        assert strip == [{k: v for k, v in r.to_dict().items() if k != 'metadata'} for r in parallel]

    def test_zero_jobs(self, sweep_config):
        with pytest.raises(ValueError):
            Sweep(sweep_config, jobs=0)
