import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Literal, Optional

import numpy as np
import pandas as pd
from sklearn.metrics import accuracy_score, mean_squared_error
from tqdm import tqdm

from splinet.architecture.adjoint import loss_and_gradients
from splinet.architecture.control import ControlParams, TimeGrid, check_grid, init_random
from splinet.architecture.dynamics import Activation, map_inputs, propagate
from splinet.problems import Dataset, Problem, ProblemSpec, make_problem
from splinet.training.optimizer import AdamState, adam_step, gradient_descent_step
from splinet.utils.config import Config, NetworkConfig
from splinet.utils.errors import ConfigError, DimensionError, DivergenceError

logger = logging.getLogger(__name__)

EPOCH_BAR_FORMAT = "{l_bar}{bar}| Epoch {n_fmt}/{total_fmt} [{elapsed}<{remaining}, {rate_fmt}]"

# second stream of the training seed, used for shuffling
SHUFFLE_STREAM = 1


def build_grid(network: NetworkConfig, n_steps: Optional[int] = None) -> TimeGrid:
    """Layer grid of a network: h = 1 for a ResNet, h = 1/N otherwise."""
    n_steps = n_steps or network.N
    if network.control_kind == 'resnet':
        return TimeGrid.resnet(n_steps)
    return TimeGrid(n_steps)


def build_params(config: Config, width: int) -> ControlParams:
    """Randomly initialized control for the configured architecture."""
    network, training = config.network, config.training
    if network.control_kind == 'splinet':
        kind, n_intervals, degree = 'splinet', network.L, network.degree
    else:
        kind, n_intervals, degree = 'per_layer', network.N, 0
    return init_random(kind, width, seed=training.seed, amplitude=training.init_amplitude,
                       n_intervals=n_intervals, degree=degree,
                       time_scale=network.time_scale.value,
                       learnable_time_scale=network.time_scale.learnable,
                       antisymmetric=network.antisymmetric, gamma_shift=network.gamma_shift)


def predict(params: ControlParams, spec: ProblemSpec, inputs: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """
    Network predictions for raw inputs.

    Returns:
        np.ndarray: mean(x_N) per sample for regression, the logits x_N for classification.
    """
    x0 = map_inputs(inputs, params.width, spec.input_map)
    output = propagate(x0, params, grid, Activation(spec.activation)).output
    return output if spec.is_classification else np.mean(output, axis=-1)


def evaluate(params: ControlParams, problem: Problem, dataset: Dataset, grid: TimeGrid) -> float:
    """
    Validation metric of a control on a dataset.

    Returns:
        float: Mean averaged-MSE loss for regression, accuracy of the argmax for classification.

    Raises:
        ValueError: If the dataset is empty.
        DivergenceError: If propagation blows up.
    """
    if len(dataset) == 0:
        raise ValueError(f'cannot evaluate on the empty dataset {dataset.name}')
    predictions = predict(params, problem.spec, dataset.inputs, grid)
    if problem.spec.is_classification:
        return float(accuracy_score(dataset.labels, np.argmax(predictions, axis=1)))
    return 0.5 * float(mean_squared_error(dataset.targets, predictions))


def regression_accuracy(targets: np.ndarray, predictions: np.ndarray) -> float:
    """1 - RMSE / RMS(targets), clamped to [0, 1]."""
    rms = float(np.sqrt(np.mean(targets ** 2)))
    if rms == 0:
        return 1.0 if np.allclose(predictions, 0) else 0.0
    rmse = float(np.sqrt(mean_squared_error(targets, predictions)))
    return float(np.clip(1.0 - rmse / rms, 0.0, 1.0))


"""
RunRecord: outcome of one training run.

Attributes:
    config (dict): Snapshot of the configuration the run used.
    loss_history (List[float]): Mean regularized training loss per epoch.
    train_metric, validation_metric (float): Final metrics, NaN when the run diverged.
    diverged (bool): Whether a non-finite state or loss stopped the run.
    time_scale (float): Final λ.
    validation_mse (Optional[float]): Plain mean squared error (regression only).
    regression_accuracy (Optional[float]): 1 - RMSE/RMS on the validation set (regression only).
    max_output_deviation (Optional[float]): max |prediction - mean(x0)| on the validation set (tanh only).
    output_bound (Optional[float]): λ times the final time, the bound on that deviation.
    tags (dict): Free labels such as the architecture and run index of a sweep.
    metadata (dict): Wall time and timestamp; excluded from reproducibility checks.
"""


@dataclass
class RunRecord:
    config: Dict[str, Any]
    loss_history: List[float]
    train_metric: float
    validation_metric: float
    diverged: bool
    time_scale: float
    param_count: int
    metric_name: str
    validation_mse: Optional[float] = None
    regression_accuracy: Optional[float] = None
    max_output_deviation: Optional[float] = None
    output_bound: Optional[float] = None
    divergence_epoch: Optional[int] = None
    tags: Dict[str, Any] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        document = {name: _json_number(getattr(self, name)) for name in (
            'train_metric', 'validation_metric', 'time_scale', 'validation_mse', 'regression_accuracy',
            'max_output_deviation', 'output_bound')}
        document.update(metric_name=self.metric_name, diverged=self.diverged, param_count=self.param_count,
                        divergence_epoch=self.divergence_epoch,
                        loss_history=[_json_number(v) for v in self.loss_history],
                        tags=dict(self.tags), config=self.config, metadata=dict(self.metadata))
        return document

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> 'RunRecord':
        values = dict(document)
        for name in ('train_metric', 'validation_metric'):
            values[name] = np.nan if values[name] is None else values[name]
        values['loss_history'] = [np.nan if v is None else v for v in values['loss_history']]
        return cls(**values)

    def loss_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'epoch': np.arange(1, len(self.loss_history) + 1), 'loss': self.loss_history})


def _json_number(value):
    if value is None:
        return None
    value = float(value)
    return value if np.isfinite(value) else None


"""
Trainer: trains one network on one problem with mini-batch ADAM and the exact adjoint gradient.

Attributes:
    config (Config): Validated experiment configuration.
    problem (Problem): Training and validation data plus the problem wiring.
    grid (TimeGrid): Layer grid of the configured architecture.
    params (ControlParams): The control being trained; owned by this trainer.
    verbose (Literal[0, 1, 2]): 0 shows a progress bar, 1 logs every epoch, 2 also logs every batch.

Methods:
    fit: Runs the configured number of epochs and returns a RunRecord.
    evaluate: Metric of the current control on a dataset.
    predict: Predictions of the current control on raw inputs.
    _log: Logs messages based on the verbosity level.
"""


class Trainer:
    def __init__(self,
                 config: Config,
                 problem: Optional[Problem] = None,
                 params: Optional[ControlParams] = None,
                 verbose: Literal[0, 1, 2] = 0,
                 progress: bool = True):
        """
        Initializes the trainer and checks the configuration against the problem.

        Args:
            config (Config): Validated configuration.
            problem (Optional[Problem]): Prebuilt problem; built from ``config.problem`` when omitted.
            params (Optional[ControlParams]): Starting control; drawn at random when omitted.
            verbose (Literal[0, 1, 2]): Verbosity level (default: 0).
            progress (bool): Show the epoch bar at verbosity 0.

        Raises:
            ConfigError: If the configuration does not fit the problem.
        """
        self.config = config
        self.verbose = verbose
        self.progress = progress
        if problem is None:
            problem = make_problem(config.problem, config.network.width, config.network.activation)
        self.problem = problem
        self.activation = Activation(self.problem.spec.activation)
        self.grid = build_grid(config.network)
        self.batch_size = self.__resolve_batch_size()
        self.__check_consistency()
        self.params = params.copy() if params is not None else build_params(config, self.problem.spec.width)
        try:
            check_grid(self.params, self.grid)
        except DimensionError as error:
            raise ConfigError('network.N', str(error))
        if self.params.width != self.problem.spec.width:
            raise ConfigError('network.width', f'control width {self.params.width} does not match the problem width '
                                               f'{self.problem.spec.width}')
        self.state = AdamState.zeros_like(self.params)

    def __resolve_batch_size(self) -> int:
        n_train = len(self.problem.train)
        batch_size = self.config.training.batch_size or self.problem.spec.default_batch_size or n_train
        if batch_size > n_train:
            raise ConfigError('training.batch_size', f'{batch_size} exceeds the {n_train} training samples')
        return batch_size

    def __check_consistency(self):
        network = self.config.network
        if network.time_scale.learnable and self.activation.homogeneous:
            logger.warning(f'a learnable time scale is redundant with the homogeneous activation '
                           f'{self.activation.kind}')
        if network.control_kind != 'splinet' and network.degree != NetworkConfig.degree:
            logger.debug(f'network.degree is ignored by {network.control_kind} networks')

    def fit(self) -> RunRecord:
        """
        Trains for ``training.epochs`` epochs.

        Each epoch shuffles the training set with the seeded generator, splits it into
        mini-batches and applies one optimizer step per batch. A non-finite state,
        loss or gradient stops the run and marks the record as diverged.
        """
        training = self.config.training
        started = time.perf_counter()
        rng = np.random.default_rng((training.seed, SHUFFLE_STREAM))
        spec, train_set = self.problem.spec, self.problem.train
        x_train = map_inputs(train_set.inputs, spec.width, spec.input_map)
        targets = train_set.targets
        n_train = len(train_set)

        loss_history: List[float] = []
        divergence_epoch = None
        for epoch in self.__epoch_progress_bar():
            order = rng.permutation(n_train)
            epoch_loss = 0.0
            try:
                for batch, start in enumerate(range(0, n_train, self.batch_size)):
                    indices = order[start:start + self.batch_size]
                    value = self.__train_batch(x_train[indices], targets[indices])
                    self._log(2, f'epoch {epoch + 1} batch {batch + 1}: loss {value:.6e}')
                    epoch_loss += value * len(indices)
            except DivergenceError as error:
                self._log(1, f'run diverged in epoch {epoch + 1}: {error}')
                divergence_epoch = epoch + 1
                loss_history.append(np.nan)
                break
            loss_history.append(epoch_loss / n_train)
            self._log(1, f'epoch {epoch + 1}/{training.epochs}: loss {loss_history[-1]:.6e}')

        record = self.__make_record(loss_history, divergence_epoch)
        record.metadata = {'wall_time': time.perf_counter() - started,
                           'timestamp': datetime.now(timezone.utc).isoformat()}
        return record

    def __train_batch(self, x0: np.ndarray, targets: np.ndarray) -> float:
        training = self.config.training
        value, grads = loss_and_gradients(self.params, x0, targets, self.problem.spec.loss, self.activation,
                                          self.grid, training.gamma, training.accumulation)
        if not (np.isfinite(value) and np.all(np.isfinite(grads.d_omega)) and np.all(np.isfinite(grads.d_beta))
                and np.isfinite(grads.d_lambda)):
            raise DivergenceError('training loss or gradient became non-finite')
        if training.optimizer == 'adam':
            adam_step(self.params, grads, self.state, training.eta, training.beta1, training.beta2,
                      training.eps_adam)
        else:
            gradient_descent_step(self.params, grads, training.eta)
        if not self.params.time_scale > 0:
            raise DivergenceError(f'time scale left the positive axis ({self.params.time_scale})')
        return value

    def __make_record(self, loss_history: List[float], divergence_epoch: Optional[int]) -> RunRecord:
        spec = self.problem.spec
        record = RunRecord(config=self.config.to_dict(), loss_history=loss_history,
                           train_metric=np.nan, validation_metric=np.nan,
                           diverged=divergence_epoch is not None, time_scale=self.params.time_scale,
                           param_count=int(self.params.to_vector().size),
                           metric_name='accuracy' if spec.is_classification else 'loss',
                           divergence_epoch=divergence_epoch)
        if record.diverged:
            return record
        try:
            record.train_metric = self.evaluate(self.problem.train)
            validation = self.problem.validation
            record.validation_metric = self.evaluate(validation)
            if not spec.is_classification:
                predictions = self.predict(validation.inputs)
                record.validation_mse = float(mean_squared_error(validation.targets, predictions))
                record.regression_accuracy = regression_accuracy(validation.targets, predictions)
                if self.activation.kind == 'tanh':
                    x0 = map_inputs(validation.inputs, spec.width, spec.input_map)
                    record.max_output_deviation = float(np.max(np.abs(predictions - np.mean(x0, axis=1))))
                    record.output_bound = self.params.time_scale * self.grid.final_time
        except DivergenceError as error:
            self._log(1, f'final evaluation diverged: {error}')
            record.diverged = True
            record.divergence_epoch = len(loss_history)
            record.train_metric = record.validation_metric = np.nan
        return record

    def evaluate(self, dataset: Optional[Dataset] = None) -> float:
        dataset = dataset if dataset is not None else self.problem.validation
        return evaluate(self.params, self.problem, dataset, self.grid)

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        return predict(self.params, self.problem.spec, inputs, self.grid)

    def __epoch_progress_bar(self):
        epochs = range(self.config.training.epochs)
        if self.verbose == 0 and self.progress:
            return tqdm(epochs, desc='Training...: ', bar_format=EPOCH_BAR_FORMAT, leave=False)
        return epochs

    def _log(self, level, *message):
        """
        Logs messages based on the verbosity level.

        Args:
            level (int): 1 logs at INFO, 2 at DEBUG.
            *message: The message(s) to log.
        """
        if self.verbose >= level:
            logger.log(logging.DEBUG if level >= 2 else logging.INFO, " ".join(map(str, message)))


def train(config: Config,
          problem: Optional[Problem] = None,
          verbose: Literal[0, 1, 2] = 0,
          progress: bool = True) -> RunRecord:
    """Trains one network; see ``Trainer.fit``."""
    return Trainer(config, problem, verbose=verbose, progress=progress).fit()
