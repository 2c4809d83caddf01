"""
Long-running reproductions of the published training results.

Run with ``pytest -m slow``.
"""
from pathlib import Path

import numpy as np
import pytest

from splinet.analysis.statistics import record_score
from splinet.analysis.sweep import Sweep
from splinet.architecture.dynamics import map_inputs
from splinet.trainer import Trainer
from splinet.utils.config import Config

CONFIG_DIRECTORY = Path(__file__).resolve().parents[1] / 'configs'

pytestmark = pytest.mark.slow


def _load(name: str) -> Config:
    return Config.load(CONFIG_DIRECTORY / f'{name}.json')


def test_sine_mini_sweep_reaches_small_error():
    config = _load('sweep_sin').replace(sweep={'architectures': [{'control_kind': 'splinet', 'degree': 1}]})
    records = Sweep(config, jobs=-1).run()
    assert len(records) == 20
    best = min(r.validation_mse for r in records if not r.diverged)
    assert best <= 1e-4


def test_peaks_spline_runs_vary_less_than_per_layer():
    records = Sweep(_load('sweep_peaks'), jobs=-1).run()
    scores = {label: np.array([record_score(r) for r in records if r.tags['architecture'] == label])
              for label in ('odenet', 'splinet-d1')}
    assert np.std(scores['splinet-d1'], ddof=1) < np.std(scores['odenet'], ddof=1)
    assert scores['splinet-d1'].max() >= 0.9


def test_frozen_time_scale_bounds_the_output():
    trainer = Trainer(_load('timescale_fixed'))
    record = trainer.fit()
    assert not record.diverged
    validation = trainer.problem.validation
    predictions = trainer.predict(validation.inputs)
    x0 = map_inputs(validation.inputs, trainer.params.width, trainer.problem.spec.input_map)
    assert np.all(np.abs(predictions - x0.mean(axis=1)) <= 3.0 + 1e-12)
    assert record.output_bound == 3.0
    assert record.regression_accuracy < 0.9


def test_learned_time_scale_grows():
    base = _load('timescale_learned')
    records = [Trainer(base.replace(training={'seed': seed})).fit() for seed in range(10)]
    successes = [r for r in records if not r.diverged and 10.0 < r.time_scale < 19.0 and r.regression_accuracy > 0.95]
    assert len(successes) >= 8
