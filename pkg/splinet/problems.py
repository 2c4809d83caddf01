import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from splinet.utils.config import ProblemConfig

logger = logging.getLogger(__name__)

PUBLISHED_FREQUENCIES = (1, 2, 5)
PEAKS_DOMAIN = (-3.0, 3.0)
PEAKS_CLASSES = 5
# side length of the reference grid the class thresholds were computed on
PEAKS_REFERENCE_GRID = 101
# 20/40/60/80 % quantiles of the peaks surface over that grid; class c lies between entries c-1 and c
PEAKS_THRESHOLDS = np.array([-0.28875959710908283, 0.0013805314418225193, 0.13619656179112116, 1.2697590224329391])
PEAKS_THRESHOLDS.setflags(write=False)
PEAKS_DEFAULT_POINTS = 1000

"""
Dataset: input/target pairs of one test problem.

Attributes:
    name (str): Identifier such as 'sin(5x)/train'.
    inputs (np.ndarray): Raw inputs of shape (n, input_dim).
    targets (np.ndarray): Scalars of shape (n,) or one-hot rows of shape (n, C).
    seed (Optional[int]): Generator seed for randomly drawn inputs.
"""


@dataclass(frozen=True)
class Dataset:
    name: str
    inputs: np.ndarray
    targets: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        if len(self.inputs) != len(self.targets):
            raise ValueError(f'{self.name}: {len(self.inputs)} inputs but {len(self.targets)} targets')
        if self.targets.ndim == 2:
            if not (np.all((self.targets == 0) | (self.targets == 1)) and np.all(self.targets.sum(axis=1) == 1)):
                raise ValueError(f'{self.name}: classification targets must be one-hot rows')
        for array in (self.inputs, self.targets):
            array.setflags(write=False)

    def __len__(self) -> int:
        return len(self.inputs)

    @property
    def is_classification(self) -> bool:
        return self.targets.ndim == 2

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.targets, axis=1)

    def to_frame(self) -> pd.DataFrame:
        columns = {f'x{j}': self.inputs[:, j] for j in range(self.inputs.shape[1])}
        if self.is_classification:
            columns['label'] = self.labels
        else:
            columns['y'] = self.targets
        return pd.DataFrame(columns)


def _sine_grid(frequency: float, n_override: Optional[int]) -> np.ndarray:
    n = n_override if n_override is not None else int(round(20 * frequency))
    if n < 2:
        raise ValueError(f'need at least 2 points, got {n}')
    return np.linspace(-np.pi, np.pi, n)


def _midpoints(x: np.ndarray) -> np.ndarray:
    return x[:-1] + 0.5 * (x[1] - x[0])


def make_sin_dataset(frequency: float, n_override: Optional[int] = None, validation: bool = False) -> Dataset:
    """
    sin(f x) on 20 f equispaced points of [-π, π], end points included.

    The validation variant uses the midpoints between the training points.
    """
    if frequency not in PUBLISHED_FREQUENCIES:
        logger.warning(f'frequency {frequency} is outside the studied set {PUBLISHED_FREQUENCIES}')
    x = _sine_grid(frequency, n_override)
    if validation:
        x = _midpoints(x)
    split = 'validation' if validation else 'train'
    return Dataset(f'sin({frequency:g}x)/{split}', x[:, None], np.sin(frequency * x))


def make_scaled_sine_dataset(amplitude: float,
                             frequency: float = 1.0,
                             n_override: Optional[int] = None,
                             validation: bool = False) -> Dataset:
    """amplitude * sin(f x) on the same grid as ``make_sin_dataset``."""
    if not amplitude > 0:
        raise ValueError(f'amplitude must be positive, got {amplitude}')
    x = _sine_grid(frequency, n_override)
    if validation:
        x = _midpoints(x)
    split = 'validation' if validation else 'train'
    return Dataset(f'{amplitude:g}sin({frequency:g}x)/{split}', x[:, None], amplitude * np.sin(frequency * x))


def peaks_function(x, y):
    """The peaks surface on [-3, 3]²."""
    return (3.0 * (1.0 - x) ** 2 * np.exp(-x ** 2 - (y + 1.0) ** 2)
            - 10.0 * (x / 5.0 - x ** 3 - y ** 5) * np.exp(-x ** 2 - y ** 2)
            - np.exp(-(x + 1.0) ** 2 - y ** 2) / 3.0)


def make_peaks_dataset(n: int = PEAKS_DEFAULT_POINTS, seed: int = 0, name: str = 'peaks') -> Dataset:
    """
    n uniform random points of [-3, 3]² labelled by the value band of the peaks surface.

    Returns:
        Dataset: Inputs of shape (n, 2) and one-hot targets of shape (n, 5).
    """
    if n < PEAKS_CLASSES:
        raise ValueError(f'n must be >= {PEAKS_CLASSES}, got {n}')
    rng = np.random.default_rng(seed)
    points = rng.uniform(*PEAKS_DOMAIN, size=(n, 2))
    labels = np.searchsorted(PEAKS_THRESHOLDS, peaks_function(points[:, 0], points[:, 1]), side='right')
    return Dataset(name, points, np.eye(PEAKS_CLASSES)[labels], seed)


"""
ProblemSpec: how a test problem is wired into a network.

Attributes:
    kind (str): 'sin', 'peaks' or 'scaled_sine'.
    width (int): Network width m.
    input_map (str): 'replicate', 'pad' or 'tile'.
    loss (str): 'averaged_mse' or 'softmax_xent'.
    activation (str): 'tanh' or 'relu'.
"""


@dataclass(frozen=True)
class ProblemSpec:
    kind: str
    width: int
    input_map: str
    loss: str
    activation: str
    frequency: float = 1.0
    amplitude: float = 1.0
    default_batch_size: Optional[int] = None

    @property
    def is_classification(self) -> bool:
        return self.loss == 'softmax_xent'


PROBLEM_DEFAULTS = {
    'sin': dict(width=4, input_map='replicate', loss='averaged_mse', activation='tanh'),
    'scaled_sine': dict(width=4, input_map='replicate', loss='averaged_mse', activation='tanh'),
    'peaks': dict(width=PEAKS_CLASSES, input_map='pad', loss='softmax_xent', activation='relu',
                  default_batch_size=50),
}


@dataclass(frozen=True)
class Problem:
    spec: ProblemSpec
    train: Dataset
    validation: Dataset


def make_problem(config: ProblemConfig,
                 width: Optional[int] = None,
                 activation: Optional[str] = None) -> Problem:
    """
    Builds the problem spec and its training and validation sets.

    Validation data is generated like the training data: the midpoint grid for the
    sine problems, fresh random points (seed + 1) for peaks.
    """
    defaults = dict(PROBLEM_DEFAULTS[config.kind])
    if width is not None and width != defaults['width']:
        logger.warning(f'{config.kind} runs with width {width} instead of {defaults["width"]}')
        defaults['width'] = width
    if activation is not None and activation != defaults['activation']:
        logger.warning(f'{config.kind} runs with {activation} instead of {defaults["activation"]}')
        defaults['activation'] = activation
    if config.input_map is not None:
        defaults['input_map'] = config.input_map
    spec = ProblemSpec(kind=config.kind, frequency=config.frequency,
                       amplitude=config.amplitude if config.kind == 'scaled_sine' else 1.0, **defaults)

    if config.kind == 'sin':
        train = make_sin_dataset(config.frequency, config.n_points)
        validation = make_sin_dataset(config.frequency, config.n_points, validation=True)
    elif config.kind == 'scaled_sine':
        train = make_scaled_sine_dataset(config.amplitude, config.frequency, config.n_points)
        validation = make_scaled_sine_dataset(config.amplitude, config.frequency, config.n_points, validation=True)
    else:
        train = make_peaks_dataset(config.n_points or PEAKS_DEFAULT_POINTS, config.seed, 'peaks/train')
        validation = make_peaks_dataset(config.n_validation or PEAKS_DEFAULT_POINTS, config.seed + 1,
                                        'peaks/validation')
    return Problem(spec=spec, train=train, validation=validation)
