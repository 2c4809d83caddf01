import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from splinet.architecture.control import ControlParams, TimeGrid, layer_controls
from splinet.utils.errors import DimensionError, DivergenceError
from splinet.utils.linalg import Matrix, Vector, hadamard, matvec

logger = logging.getLogger(__name__)

ActivationKind = Literal['tanh', 'relu', 'identity']
ACTIVATION_KINDS = ('tanh', 'relu', 'identity')
InputMapKind = Literal['replicate', 'pad', 'tile']


@dataclass(frozen=True)
class Activation:
    """
    Elementwise activation σ with its derivative σ′.

    The ReLU derivative at 0 is taken as 0.
    """
    kind: ActivationKind

    def __post_init__(self):
        if self.kind not in ACTIVATION_KINDS:
            raise ValueError(f'Invalid activation {self.kind}. Only {ACTIVATION_KINDS} are acceptable.')

    def __call__(self, v: np.ndarray) -> np.ndarray:
        if self.kind == 'tanh':
            return np.tanh(v)
        if self.kind == 'relu':
            return np.maximum(v, 0.0)
        return np.array(v, dtype=np.float64, copy=True)

    def derivative(self, v: np.ndarray) -> np.ndarray:
        if self.kind == 'tanh':
            return 1.0 - np.tanh(v) ** 2
        if self.kind == 'relu':
            return (v > 0.0).astype(np.float64)
        return np.ones_like(v, dtype=np.float64)

    @property
    def homogeneous(self) -> bool:
        """σ(αv) = ασ(v) for α >= 0."""
        return self.kind in ('relu', 'identity')


@dataclass
class Trajectory:
    """
    States x_0, ..., x_N of one forward propagation.

    ``states`` has shape (N+1, m) for a single input or (N+1, batch, m) for a batch.
    The materialized layer controls and the pre-activations W_i x_i + b_i are kept
    for the adjoint sweep.
    """
    states: np.ndarray
    grid: TimeGrid
    weights: np.ndarray
    biases: np.ndarray
    pre_activations: np.ndarray
    time_scale: float

    @property
    def output(self) -> np.ndarray:
        return self.states[-1]

    @property
    def n_steps(self) -> int:
        return self.grid.n_steps


def step(x: Vector, W: Matrix, b: Vector, h: float, time_scale: float, activation: Activation,
         pre_activation: Optional[np.ndarray] = None) -> Vector:
    """
    One forward Euler step x + h λ σ(W x + b).

    ``x`` may carry a leading batch axis. ``pre_activation`` is W x + b when the caller
    already has it.

    Raises:
        DivergenceError: If the new state is not finite.
    """
    if pre_activation is None:
        pre_activation = matvec(W, x) + b
    x_next = x + h * time_scale * activation(pre_activation)
    if not np.all(np.isfinite(x_next)):
        raise DivergenceError('forward propagation produced a non-finite state')
    return x_next


def propagate(x0: np.ndarray,
              params: ControlParams,
              grid: TimeGrid,
              activation: Activation) -> Trajectory:
    """
    Forward Euler propagation through all N layers.

    Args:
        x0 (np.ndarray): Initial state of shape (m,) or a batch of shape (batch, m).
        params (ControlParams): The control; layer i uses its value at t_i = i/N.
        grid (TimeGrid): Layer count and step size.
        activation (Activation): σ.

    Returns:
        Trajectory: All states plus the cached layer quantities.

    Raises:
        DimensionError: If the width of x0 differs from the control width.
        DivergenceError: As soon as a state becomes non-finite.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape[-1] != params.width or x0.ndim not in (1, 2):
        raise DimensionError(f'initial state of shape {x0.shape} does not match width {params.width}')
    weights, biases = layer_controls(params, grid)
    h, time_scale = grid.h, params.time_scale
    states = np.empty((grid.n_steps + 1,) + x0.shape)
    pre_activations = np.empty((grid.n_steps,) + x0.shape)
    states[0] = x0
    for i in range(grid.n_steps):
        pre_activations[i] = matvec(weights[i], states[i]) + biases[i]
        try:
            states[i + 1] = step(states[i], weights[i], biases[i], h, time_scale, activation, pre_activations[i])
        except DivergenceError as error:
            logger.debug('state became non-finite at layer %d of %d', i, grid.n_steps)
            raise DivergenceError('forward propagation produced a non-finite state', step=i) from error
    return Trajectory(states=states, grid=grid, weights=weights, biases=biases,
                      pre_activations=pre_activations, time_scale=time_scale)


def input_map_replicate(x: float, width: int) -> Vector:
    """Replicates a scalar input onto the network width, x(0) = [1, ..., 1]ᵀ x."""
    if width < 1:
        raise ValueError(f'width must be >= 1, got {width}')
    return np.full(width, float(x))


def input_map_identity(x: Vector, width: int) -> Vector:
    """Places the input in the leading components and zero-pads to the network width."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] > width:
        raise DimensionError(f'input of length {x.shape[0]} does not fit into width {width}')
    padded = np.zeros(width)
    padded[:x.shape[0]] = x
    return padded


def input_map_tile(x: Vector, width: int) -> Vector:
    """Repeats the input cyclically to the network width, e.g. [x, y, x, y, x]."""
    x = np.asarray(x, dtype=np.float64).ravel()
    return np.resize(x, width)


def map_inputs(inputs: np.ndarray, width: int, kind: InputMapKind) -> np.ndarray:
    """
    Maps a batch of raw inputs of shape (n, input_dim) onto initial states (n, width).
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim == 1:
        inputs = inputs[:, None]
    if kind == 'replicate':
        if inputs.shape[1] != 1:
            raise DimensionError(f'replication needs scalar inputs, got dimension {inputs.shape[1]}')
        return np.stack([input_map_replicate(x, width) for x in inputs[:, 0]])
    if kind == 'pad':
        return np.stack([input_map_identity(x, width) for x in inputs])
    if kind == 'tile':
        return np.stack([input_map_tile(x, width) for x in inputs])
    raise ValueError(f'Invalid input map {kind}')


def scaled_jacobian(x: Vector, W: Matrix, b: Vector, h: float, time_scale: float,
                    activation: Activation) -> Matrix:
    """h λ diag(σ′(W x + b)) W, the operator whose spectrum decides Euler stability."""
    slope = activation.derivative(matvec(W, x) + b)
    return h * time_scale * hadamard(np.repeat(slope[:, None], W.shape[1], axis=1), W)
