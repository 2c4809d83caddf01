"""
Command-line entry point.

Every subcommand reads one JSON configuration, runs one pipeline and writes its
results into the configured output directory. Exit codes: 0 on success, 1 for
configuration and input errors, 2 for numerical failures.
"""
import argparse
import json
import logging
import sys
from typing import List, Optional

import numpy as np

from splinet.analysis.convergence import convergence_study
from splinet.analysis.stability import scan_frame, spectrum_scan, stability_spectrum
from splinet.analysis.statistics import stats_frame, summarize_by
from splinet.analysis.sweep import Sweep
from splinet.architecture.adjoint import gradient_check
from splinet.architecture.bspline import SplineBasis, sample_basis
from splinet.architecture.control import ControlParams
from splinet.architecture.dynamics import Activation, map_inputs
from splinet.problems import Problem, make_problem
from splinet.trainer import Trainer, build_grid, build_params, evaluate
from splinet.utils.config import Config
from splinet.utils.errors import ConfigError, DimensionError, NumericalError
from splinet.utils.io import ensure_directory, write_frame, write_json, write_jsonl

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2
SUBCOMMANDS = ('train', 'sweep', 'convergence', 'spectrum', 'gradcheck', 'basis', 'dataset', 'eval')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='splinet', description='Continuous-depth networks with spline controls')
    subparsers = parser.add_subparsers(dest='command', required=True)
    helps = {
        'train': 'Train one network',
        'sweep': 'Random hyperparameter sweep with statistics',
        'convergence': 'Output error over the step size h = 1/N',
        'spectrum': 'Forward Euler stability spectrum along a probe trajectory',
        'gradcheck': 'Compare adjoint gradients with finite differences',
        'basis': 'Sample the B-spline basis functions',
        'dataset': 'Write the training and validation data',
        'eval': 'Evaluate a saved control, optionally on another layer count',
    }
    for name in SUBCOMMANDS:
        sub = subparsers.add_parser(name, help=helps[name])
        sub.add_argument('--config', type=str, required=True, help='Path to the JSON configuration')
        sub.add_argument('--output', type=str, default=None, help='Output directory (overrides output.directory)')
        sub.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG')
        if name in ('spectrum', 'gradcheck', 'convergence', 'eval'):
            sub.add_argument('--params', type=str, default=None, required=name == 'eval',
                             help='Saved control (JSON) instead of a random initialization')
        if name == 'eval':
            sub.add_argument('--network-N', type=int, default=None, help='Layer count to evaluate on')
        if name == 'sweep':
            sub.add_argument('--jobs', type=int, default=1, help='Parallel training runs')
        if name == 'basis':
            sub.add_argument('--samples', type=int, default=201, help='Sample points on [0, 1]')
    return parser


def _configure_logging(verbosity: int):
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(asctime)s - %(levelname)s - %(message)s')


def _load_params(path: str) -> ControlParams:
    try:
        return ControlParams.load(path)
    except FileNotFoundError:
        raise ConfigError(path, 'parameter file not found')
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as error:
        raise ConfigError(path, f'invalid parameter file ({error})')


def _problem(config: Config) -> Problem:
    return make_problem(config.problem, config.network.width, config.network.activation)


def _params(config: Config, problem: Problem, path: Optional[str]) -> ControlParams:
    if path is not None:
        return _load_params(path)
    return build_params(config, problem.spec.width)


def _probe(config: Config, problem: Problem) -> np.ndarray:
    index = config.analysis.probe_index
    if index >= len(problem.train):
        raise ConfigError('analysis.probe_index', f'{index} exceeds the {len(problem.train)} training samples')
    return map_inputs(problem.train.inputs[index:index + 1], problem.spec.width, problem.spec.input_map)[0]


class Runner:
    """Runs one subcommand; every method returns the one-line summary."""

    def __init__(self, config: Config, args: argparse.Namespace):
        self.config = config
        self.args = args
        self.directory = ensure_directory(args.output or config.output.directory)
        self.formats = set(config.output.formats)
        self.verbose = min(args.verbose, 2)

    def _json(self, name: str, document):
        if 'json' in self.formats:
            write_json(self.directory / name, document)

    def _csv(self, name: str, frame):
        if 'csv' in self.formats:
            write_frame(self.directory / name, frame)

    def train(self) -> str:
        trainer = Trainer(self.config, verbose=self.verbose)
        record = trainer.fit()
        self._json('run_record.json', record.to_dict())
        self._csv('loss_history.csv', record.loss_frame())
        if record.diverged:
            raise NumericalError(f'training diverged in epoch {record.divergence_epoch}')
        write_json(self.directory / 'params.json', trainer.params.to_dict())
        return (f'train: {self.config.network.label} validation {record.metric_name} '
                f'{record.validation_metric:.6g} after {len(record.loss_history)} epochs -> {self.directory}')

    def sweep(self) -> str:
        sweep = Sweep(self.config, jobs=self.args.jobs, verbose=self.verbose)
        records = sweep.run()
        write_jsonl(self.directory / 'records.jsonl', [record.to_dict() for record in records])
        stats = sweep.stats()
        self._csv('stats.csv', stats_frame(stats))
        self._csv('stats_by_L.csv', summarize_by(records))
        self._json('stats.json', [s.to_dict() for s in stats])
        best = ', '.join(f'{s.label} median {s.median:.4g}' for s in stats)
        return f'sweep: {len(records)} runs ({sum(r.diverged for r in records)} diverged); {best} -> {self.directory}'

    def convergence(self) -> str:
        problem = _problem(self.config)
        params = _params(self.config, problem, self.args.params)
        try:
            report = convergence_study(params, _probe(self.config, problem), self.config.analysis.n_steps_list,
                                       Activation(problem.spec.activation), self.config.analysis.reference_step)
        except DimensionError as error:
            raise ConfigError('network.control_kind', str(error))
        self._csv('convergence.csv', report.to_frame())
        self._json('convergence.json', report.to_dict())
        return f'convergence: fitted order {report.slope:.4f} over N={report.n_steps.tolist()} -> {self.directory}'

    def spectrum(self) -> str:
        problem = _problem(self.config)
        params = _params(self.config, problem, self.args.params)
        activation = Activation(problem.spec.activation)
        probe = _probe(self.config, problem)
        report = stability_spectrum(params, build_grid(self.config.network), activation, probe)
        self._csv('spectrum.csv', report.to_frame())
        document = report.to_dict()
        if params.kind == 'splinet' and self.config.analysis.spectrum_step_sizes:
            scan = spectrum_scan(params, activation, probe, self.config.analysis.spectrum_step_sizes)
            self._csv('spectrum_scan.csv', scan_frame(scan))
            document['scan'] = [r.to_dict() for r in scan]
        self._json('spectrum.json', document)
        return (f'spectrum: {100 * report.fraction_inside:.1f}% of {report.inside.size} eigenvalues inside '
                f'the stability disk at h={report.step_size:g} -> {self.directory}')

    def gradcheck(self) -> str:
        problem = _problem(self.config)
        params = _params(self.config, problem, self.args.params)
        spec = problem.spec
        x0 = map_inputs(problem.train.inputs, spec.width, spec.input_map)
        report = gradient_check(params, x0, problem.train.targets, spec.loss, Activation(spec.activation),
                                build_grid(self.config.network), self.config.training.gamma,
                                self.config.analysis.gradcheck_epsilon)
        self._json('gradcheck.json', {'max_relative_error': report.max_relative_error,
                                      'worst_parameter': report.worst_parameter,
                                      'n_parameters': report.n_parameters, 'epsilon': report.epsilon,
                                      'd_lambda': report.d_lambda, 'passed': report.passed()})
        summary = (f'gradcheck: max relative error {report.max_relative_error:.3e} over '
                   f'{report.n_parameters} parameters -> {self.directory}')
        if not report.passed():
            raise NumericalError(summary)
        return summary

    def basis(self) -> str:
        network = self.config.network
        basis = SplineBasis(network.degree, network.L)
        self._csv('basis.csv', sample_basis(basis, self.args.samples))
        return f'basis: {basis.n_basis} functions of degree {basis.degree} -> {self.directory}'

    def dataset(self) -> str:
        problem = _problem(self.config)
        self._csv('train.csv', problem.train.to_frame())
        self._csv('validation.csv', problem.validation.to_frame())
        return f'dataset: {len(problem.train)} training and {len(problem.validation)} validation samples ' \
               f'-> {self.directory}'

    def eval(self) -> str:
        problem = _problem(self.config)
        params = _load_params(self.args.params)
        grid = build_grid(self.config.network, self.args.network_N)
        if params.width != problem.spec.width:
            raise ConfigError(self.args.params, f'control width {params.width} does not match the problem')
        try:
            metrics = {'N': grid.n_steps, 'h': grid.h,
                       'train': evaluate(params, problem, problem.train, grid),
                       'validation': evaluate(params, problem, problem.validation, grid)}
        except DimensionError as error:
            raise ConfigError('--network-N', str(error))
        metrics['metric'] = 'accuracy' if problem.spec.is_classification else 'loss'
        self._json('eval.json', metrics)
        return f"eval: validation {metrics['metric']} {metrics['validation']:.6g} on N={grid.n_steps} -> " \
               f"{self.directory}"


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = Config.load(args.config)
        if args.command == 'sweep' and args.jobs == 0:
            raise ConfigError('--jobs', 'must be non-zero')
        if args.command == 'basis' and args.samples < 2:
            raise ConfigError('--samples', f'needs at least two sample points, got {args.samples}')
        summary = getattr(Runner(config, args), args.command)()
    except (ConfigError, DimensionError) as error:
        logger.error(str(error))
        print(f'error: {error}', file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as error:
        logger.error(str(error))
        print(f'numerical failure: {error}', file=sys.stderr)
        return EXIT_NUMERICAL
    print(summary)
    return EXIT_OK


if __name__ == '__main__':
    raise SystemExit(main())
