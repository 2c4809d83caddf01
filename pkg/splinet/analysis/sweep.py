import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Literal, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from splinet.analysis.statistics import N_RESAMPLES, SweepStats, summarize
from splinet.problems import Problem, make_problem
from splinet.trainer import RunRecord, train
from splinet.utils.config import Config, SweepRanges

logger = logging.getLogger(__name__)

RUN_BAR_FORMAT = "{l_bar}{bar}| Run {n_fmt}/{total_fmt} [{elapsed}<{remaining}, {rate_fmt}]"


@dataclass(frozen=True)
class SweepSample:
    run_index: int
    eta: float
    gamma: float
    init_amplitude: float
    L: int


def _log_uniform(rng: np.random.Generator, low_high: Sequence[float], size: int) -> np.ndarray:
    low, high = low_high
    return np.exp(rng.uniform(np.log(low), np.log(high), size=size))


def sample_hyperparameters(ranges: SweepRanges, n_runs: int, seed) -> List[SweepSample]:
    """
    Draws η, γ and the initial amplitude log-uniformly and L uniformly from its integer range.

    Args:
        ranges (SweepRanges): Inclusive [low, high] bounds.
        n_runs (int): Number of samples.
        seed: Anything ``np.random.default_rng`` accepts.
    """
    if n_runs < 1:
        raise ValueError(f'n_runs must be >= 1, got {n_runs}')
    rng = np.random.default_rng(seed)
    eta = _log_uniform(rng, ranges.eta, n_runs)
    gamma = _log_uniform(rng, ranges.gamma, n_runs)
    amplitude = _log_uniform(rng, ranges.init_amplitude, n_runs)
    n_intervals = rng.integers(ranges.L[0], ranges.L[1] + 1, size=n_runs)
    return [SweepSample(run_index=i, eta=float(np.clip(eta[i], *ranges.eta)),
                        gamma=float(np.clip(gamma[i], *ranges.gamma)),
                        init_amplitude=float(np.clip(amplitude[i], *ranges.init_amplitude)),
                        L=int(n_intervals[i]))
            for i in range(n_runs)]


def architecture_label(architecture: Dict[str, Any]) -> str:
    if architecture['control_kind'] == 'splinet':
        return f"splinet-d{architecture.get('degree', 1)}"
    return architecture['control_kind']


def run_config(base: Config, architecture: Dict[str, Any], sample: SweepSample, seed: int) -> Config:
    """
    Configuration of one sweep run.

    A per-layer architecture gets N = L layers so that every architecture is compared
    at the same number of coefficient matrices.
    """
    network = {'control_kind': architecture['control_kind']}
    if architecture['control_kind'] == 'splinet':
        network.update(degree=architecture.get('degree', 1), L=sample.L)
    else:
        network.update(N=sample.L)
    training = {'eta': sample.eta, 'gamma': sample.gamma, 'init_amplitude': sample.init_amplitude,
                'seed': seed + sample.run_index}
    return base.replace(network=network, training=training)


"""
Sweep: random hyperparameter search over several architectures.

Attributes:
    config (Config): Base configuration; its ``sweep`` section defines ranges, run count and architectures.
    problem (Problem): Data shared by every run.
    jobs (int): Parallel workers; runs are independent and collected in run order.
    verbose (Literal[0, 1, 2]): 0 shows a progress bar, 1 logs every run, 2 also logs the sampled values.

Methods:
    samples: Hyperparameter samples of one architecture.
    run: Trains every (architecture, sample) pair and returns the records.
    stats: Summary statistics per architecture.
"""


class Sweep:
    def __init__(self,
                 config: Config,
                 problem: Optional[Problem] = None,
                 jobs: int = 1,
                 verbose: Literal[0, 1, 2] = 0):
        if jobs == 0:
            raise ValueError('jobs must be non-zero')
        self.config = config
        if problem is None:
            problem = make_problem(config.problem, config.network.width, config.network.activation)
        self.problem = problem
        self.jobs = jobs
        self.verbose = verbose
        self.records: List[RunRecord] = []

    def samples(self, architecture_index: int) -> List[SweepSample]:
        """The paired mode reuses one sample sequence for every architecture."""
        sweep = self.config.sweep
        seed = sweep.seed if sweep.paired else (sweep.seed, architecture_index)
        return sample_hyperparameters(sweep.ranges, sweep.n_runs, seed)

    def tasks(self) -> List[tuple]:
        tasks = []
        for index, architecture in enumerate(self.config.sweep.architectures):
            label = architecture_label(architecture)
            for sample in self.samples(index):
                config = run_config(self.config, architecture, sample, self.config.training.seed)
                tags = {'architecture': label, **asdict(sample)}
                tasks.append((config, tags))
                self._log(2, f'{label} run {sample.run_index}: eta={sample.eta:.3e} gamma={sample.gamma:.3e} '
                             f'amplitude={sample.init_amplitude:.3e} L={sample.L}')
        return tasks

    def run(self) -> List[RunRecord]:
        """
        Trains every configuration. Diverged runs are kept.

        Returns:
            List[RunRecord]: Ordered by architecture, then run index.
        """
        tasks = self.tasks()
        if self.jobs == 1:
            self.records = [self.__run_task(config, tags) for config, tags in self.__progress_bar(tasks)]
        else:
            self._log(1, f'running {len(tasks)} trainings on {self.jobs} workers')
            self.records = Parallel(n_jobs=self.jobs)(
                delayed(_train_run)(config, self.problem, tags) for config, tags in tasks)
        diverged = sum(record.diverged for record in self.records)
        self._log(1, f'sweep finished: {len(self.records)} runs, {diverged} diverged')
        return self.records

    def __run_task(self, config: Config, tags: Dict[str, Any]) -> RunRecord:
        record = _train_run(config, self.problem, tags)
        self._log(1, f"{tags['architecture']} run {tags['run_index']}: "
                     f"{record.metric_name} {record.validation_metric:.6g}{' (diverged)' if record.diverged else ''}")
        return record

    def stats(self, n_resamples: int = N_RESAMPLES) -> List[SweepStats]:
        """One SweepStats per architecture with at least two runs."""
        stats = []
        for architecture in self.config.sweep.architectures:
            label = architecture_label(architecture)
            records = [r for r in self.records if r.tags.get('architecture') == label]
            if len(records) >= 2:
                stats.append(summarize(records, label=label, n_resamples=n_resamples, seed=self.config.sweep.seed))
            else:
                logger.warning(f'{label}: {len(records)} run is too few for statistics')
        return stats

    def __progress_bar(self, tasks):
        if self.verbose == 0:
            return tqdm(tasks, desc='Sweeping...: ', bar_format=RUN_BAR_FORMAT)
        return tasks

    def _log(self, level, *message):
        if self.verbose >= level:
            logger.log(logging.DEBUG if level >= 2 else logging.INFO, " ".join(map(str, message)))


def _train_run(config: Config, problem: Problem, tags: Dict[str, Any]) -> RunRecord:
    record = train(config, problem, verbose=0, progress=False)
    record.tags = tags
    return record
