"""
Summary statistics of sweep results.

A diverged run is kept as a completed run with the worst possible metric: accuracy 0
for classification and an infinite error for regression. Bootstrap confidence
intervals use the percentile method of ``scipy.stats.bootstrap``.
"""
import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import bootstrap

logger = logging.getLogger(__name__)

N_RESAMPLES = 10_000
CONFIDENCE_LEVEL = 0.95
GROUP_KEYS = ('architecture', 'L')


@dataclass
class SweepStats:
    """
    Statistics of one metric over the runs of one configuration.

    ``std`` is the sample standard deviation (n - 1). ``mean_ci`` and ``std_ci`` are
    bootstrap confidence intervals that always contain their point estimate.
    """
    label: str
    metric: str
    n: int
    n_diverged: int
    mean: float
    std: float
    min: float
    max: float
    median: float
    q1: float
    q3: float
    mean_ci: Tuple[float, float]
    std_ci: Tuple[float, float]

    def to_dict(self) -> Dict[str, Any]:
        document = asdict(self)
        document['mean_ci_low'], document['mean_ci_high'] = document.pop('mean_ci')
        document['std_ci_low'], document['std_ci_high'] = document.pop('std_ci')
        return document


def record_score(record) -> float:
    """Validation metric of a RunRecord, with the worst value for a diverged run."""
    if record.diverged or not np.isfinite(record.validation_metric):
        return 0.0 if record.metric_name == 'accuracy' else float('inf')
    return float(record.validation_metric)


def _sample_std(values: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.std(values, ddof=1, axis=axis)


def _bootstrap_ci(values: np.ndarray, statistic, point: float, n_resamples: int, seed: int,
                  confidence_level: float) -> Tuple[float, float]:
    if np.all(values == values[0]):
        return point, point
    result = bootstrap((values,), statistic, n_resamples=n_resamples, confidence_level=confidence_level,
                       method='percentile', vectorized=True, random_state=np.random.default_rng(seed))
    low, high = float(result.confidence_interval.low), float(result.confidence_interval.high)
    return min(low, point), max(high, point)


def summarize_values(values: Sequence[float],
                     label: str = '',
                     metric: str = 'validation_metric',
                     n_diverged: int = 0,
                     n_resamples: int = N_RESAMPLES,
                     seed: int = 0,
                     confidence_level: float = CONFIDENCE_LEVEL) -> SweepStats:
    """
    Mean, sample std, extremes, quartiles and bootstrap CIs of a list of values.

    Infinite values (diverged regression runs) make the mean, the std and both
    intervals infinite; quantiles are then taken with the inverted CDF so that no
    interpolation touches an infinite value.

    Raises:
        ValueError: For fewer than two values or a NaN value.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise ValueError(f'need at least 2 values for a standard deviation, got {values.size}')
    if np.any(np.isnan(values)):
        raise ValueError(f'{label}: metric values contain NaN')

    finite = bool(np.all(np.isfinite(values)))
    method = 'linear' if finite else 'inverted_cdf'
    q1, median, q3 = (float(q) for q in np.quantile(values, [0.25, 0.5, 0.75], method=method))
    if finite:
        mean, std = float(np.mean(values)), float(_sample_std(values))
        mean_ci = _bootstrap_ci(values, np.mean, mean, n_resamples, seed, confidence_level)
        std_ci = _bootstrap_ci(values, _sample_std, std, n_resamples, seed, confidence_level)
    else:
        logger.debug(f'{label}: {np.count_nonzero(~np.isfinite(values))} infinite values')
        mean = std = float('inf')
        mean_ci = std_ci = (float('inf'), float('inf'))
    return SweepStats(label=label, metric=metric, n=int(values.size), n_diverged=n_diverged,
                      mean=mean, std=std, min=float(np.min(values)), max=float(np.max(values)),
                      median=median, q1=q1, q3=q3, mean_ci=mean_ci, std_ci=std_ci)


def summarize(records: Sequence, label: str = '', n_resamples: int = N_RESAMPLES, seed: int = 0) -> SweepStats:
    """Statistics of the validation metric over a list of RunRecords."""
    if len(records) < 2:
        raise ValueError(f'need at least 2 records, got {len(records)}')
    metrics = {record.metric_name for record in records}
    if len(metrics) != 1:
        raise ValueError(f'records mix the metrics {sorted(metrics)}')
    return summarize_values([record_score(r) for r in records], label=label, metric=metrics.pop(),
                            n_diverged=sum(r.diverged for r in records), n_resamples=n_resamples, seed=seed)


def summarize_by(records: Sequence, keys: Sequence[str] = GROUP_KEYS) -> pd.DataFrame:
    """
    Median and quartiles of the validation metric per group of record tags.

    Returns:
        pd.DataFrame: One row per group with ``keys`` plus n, n_diverged, min, q1, median, q3, max.
    """
    rows: List[Dict[str, Any]] = []
    for record in records:
        row = {key: record.tags.get(key) for key in keys}
        row.update(score=record_score(record), diverged=record.diverged)
        rows.append(row)
    frame = pd.DataFrame(rows, columns=list(keys) + ['score', 'diverged'])
    summary = []
    for group, part in frame.groupby(list(keys), sort=True):
        scores = part['score'].to_numpy(dtype=np.float64)
        method = 'linear' if np.all(np.isfinite(scores)) else 'inverted_cdf'
        q1, median, q3 = np.quantile(scores, [0.25, 0.5, 0.75], method=method)
        summary.append(dict(zip(keys, group), n=len(scores), n_diverged=int(part['diverged'].sum()),
                            min=float(scores.min()), q1=float(q1), median=float(median), q3=float(q3),
                            max=float(scores.max())))
    return pd.DataFrame(summary, columns=list(keys) + ['n', 'n_diverged', 'min', 'q1', 'median', 'q3', 'max'])


def stats_frame(stats: Sequence[SweepStats]) -> pd.DataFrame:
    return pd.DataFrame([s.to_dict() for s in stats])
