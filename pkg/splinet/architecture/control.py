import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional, Tuple, Union

import numpy as np

from splinet.architecture.bspline import SplineBasis, layer_table
from splinet.utils.errors import DimensionError
from splinet.utils.linalg import Matrix, Vector

ControlKind = Literal['splinet', 'per_layer']
CONTROL_KINDS = ('splinet', 'per_layer')
PARAMS_FORMAT_VERSION = 1

# tolerance when matching a query time against the layer times of a per-layer control
GRID_MATCH_TOLERANCE = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """
    Uniform layer times of a discretized network.

    Controls are always evaluated at the reference times s_i = i/N in [0, 1]; the
    step size h sets the physical time span N*h. An ODEnet or SpliNet uses h = 1/N,
    a ResNet uses h = 1.

    Attributes:
        n_steps (int): Number N of layers (time steps).
        step_size (float): Step size h; defaults to 1/N.
    """
    n_steps: int
    step_size: Optional[float] = None

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError(f'n_steps must be >= 1, got {self.n_steps}')
        if self.step_size is None:
            object.__setattr__(self, 'step_size', 1.0 / self.n_steps)
        if not self.step_size > 0:
            raise ValueError(f'step_size must be positive, got {self.step_size}')

    @classmethod
    def resnet(cls, n_steps: int) -> 'TimeGrid':
        return cls(n_steps, 1.0)

    @property
    def h(self) -> float:
        return self.step_size

    @property
    def final_time(self) -> float:
        return self.n_steps * self.step_size

    @property
    def reference_times(self) -> np.ndarray:
        return np.array([i / self.n_steps for i in range(self.n_steps + 1)])

    @property
    def times(self) -> np.ndarray:
        return np.array([i * self.step_size for i in range(self.n_steps + 1)])


"""
ControlParams: the trainable parameterization of the control θ(t) = (W(t), b(t)).

A SpliNet control holds L+d coefficient matrices ω_l and vectors β_l, combined with
the B-spline basis of degree d. A per-layer control (ODEnet / ResNet) holds one pair
per layer. Coefficients are stored as stacked arrays, ``omega`` of shape (K, m, m)
and ``beta`` of shape (K, m), where row l + d holds the coefficient of basis index l.

Attributes:
    kind (ControlKind): 'splinet' or 'per_layer'.
    omega (np.ndarray): Weight coefficients, shape (K, m, m).
    beta (np.ndarray): Bias coefficients, shape (K, m).
    n_intervals (int): L for a SpliNet, the layer count N for a per-layer control.
    degree (int): Spline degree d (0 for per-layer controls).
    time_scale (float): λ > 0 multiplying the right-hand side.
    learnable_time_scale (bool): Whether λ is trained.
    antisymmetric (bool): Replace W by W - Wᵀ - γ_shift I when materializing.
    gamma_shift (float): Identity shift used with ``antisymmetric``.

Methods:
    basis: The SplineBasis of a SpliNet control.
    copy(): Deep copy, owned by one training run.
    to_vector() / from_vector(): Flat view of every trainable scalar.
    to_dict() / from_dict(), save() / load(): JSON document of the control.
"""


@dataclass
class ControlParams:
    kind: ControlKind
    omega: np.ndarray
    beta: np.ndarray
    n_intervals: int
    degree: int = 0
    time_scale: float = 1.0
    learnable_time_scale: bool = False
    antisymmetric: bool = False
    gamma_shift: float = 0.0
    _basis: Optional[SplineBasis] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in CONTROL_KINDS:
            raise ValueError(f'Invalid control kind {self.kind}. Only {CONTROL_KINDS} are acceptable.')
        self.omega = np.array(self.omega, dtype=np.float64)
        self.beta = np.array(self.beta, dtype=np.float64)
        if self.omega.ndim != 3 or self.omega.shape[1] != self.omega.shape[2] or self.omega.shape[1] < 1:
            raise DimensionError(f'omega must have shape (K, m, m), got {self.omega.shape}')
        if self.beta.shape != self.omega.shape[:2]:
            raise DimensionError(f'beta must have shape {self.omega.shape[:2]}, got {self.beta.shape}')
        if self.kind == 'per_layer' and self.degree != 0:
            raise ValueError('per-layer controls have no spline degree')
        expected = self.n_intervals + self.degree
        if self.n_coefficients != expected:
            raise DimensionError(f'{self.kind} control needs {expected} coefficients, got {self.n_coefficients}')
        if not self.time_scale > 0:
            raise ValueError(f'time scale must be positive, got {self.time_scale}')
        if self.gamma_shift < 0:
            raise ValueError(f'gamma_shift must be >= 0, got {self.gamma_shift}')
        if self.kind == 'splinet':
            self._basis = SplineBasis(self.degree, self.n_intervals)

    @property
    def width(self) -> int:
        return self.omega.shape[1]

    @property
    def n_coefficients(self) -> int:
        return self.omega.shape[0]

    @property
    def basis(self) -> SplineBasis:
        if self._basis is None:
            raise ValueError('per-layer controls have no spline basis')
        return self._basis

    def copy(self) -> 'ControlParams':
        return copy.deepcopy(self)

    def to_vector(self) -> np.ndarray:
        parts = [self.omega.ravel(), self.beta.ravel()]
        if self.learnable_time_scale:
            parts.append(np.array([self.time_scale]))
        return np.concatenate(parts)

    def from_vector(self, vector: np.ndarray) -> 'ControlParams':
        """A copy of this control with the trainable scalars taken from ``vector``."""
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (param_count(self),):
            raise DimensionError(f'expected {param_count(self)} parameters, got {vector.shape}')
        params = self.copy()
        n_omega = self.omega.size
        params.omega = vector[:n_omega].reshape(self.omega.shape).copy()
        params.beta = vector[n_omega:n_omega + self.beta.size].reshape(self.beta.shape).copy()
        if self.learnable_time_scale:
            params.time_scale = float(vector[-1])
        return params

    def to_dict(self) -> dict:
        return {
            'version': PARAMS_FORMAT_VERSION,
            'kind': self.kind,
            'degree': self.degree,
            'L': self.n_intervals,
            'm': self.width,
            'lambda': self.time_scale,
            'lambda_learnable': self.learnable_time_scale,
            'antisymmetric': self.antisymmetric,
            'gamma_shift': self.gamma_shift,
            'omega': [w.ravel().tolist() for w in self.omega],
            'beta': [b.tolist() for b in self.beta],
        }

    @classmethod
    def from_dict(cls, document: dict) -> 'ControlParams':
        m = int(document['m'])
        omega = np.array(document['omega'], dtype=np.float64).reshape(-1, m, m)
        return cls(kind=document['kind'],
                   omega=omega,
                   beta=np.array(document['beta'], dtype=np.float64).reshape(-1, m),
                   n_intervals=int(document['L']),
                   degree=int(document.get('degree', 0)),
                   time_scale=float(document.get('lambda', 1.0)),
                   learnable_time_scale=bool(document.get('lambda_learnable', False)),
                   antisymmetric=bool(document.get('antisymmetric', False)),
                   gamma_shift=float(document.get('gamma_shift', 0.0)))

    def save(self, path: Union[str, Path]):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'ControlParams':
        return cls.from_dict(json.loads(Path(path).read_text()))


def init_random(kind: ControlKind,
                width: int,
                seed: int,
                amplitude: float,
                n_intervals: int,
                degree: int = 0,
                time_scale: float = 1.0,
                learnable_time_scale: bool = False,
                antisymmetric: bool = False,
                gamma_shift: float = 0.0) -> ControlParams:
    """
    Draws every coefficient entry i.i.d. uniform on [-amplitude, amplitude].

    Args:
        kind (ControlKind): 'splinet' or 'per_layer'.
        width (int): Network width m.
        seed (int): Seed of the generator; equal seeds give equal parameters.
        amplitude (float): Bound of the uniform distribution, must be positive.
        n_intervals (int): L for a SpliNet, N for a per-layer control.
        degree (int): Spline degree d (SpliNet only).
        time_scale (float): Initial λ.

    Returns:
        ControlParams: The initialized control.
    """
    if not amplitude > 0:
        raise ValueError(f'amplitude must be positive, got {amplitude}')
    if width < 1:
        raise ValueError(f'width must be >= 1, got {width}')
    degree = degree if kind == 'splinet' else 0
    n_coefficients = n_intervals + degree
    rng = np.random.default_rng(seed)
    omega = rng.uniform(-amplitude, amplitude, size=(n_coefficients, width, width))
    beta = rng.uniform(-amplitude, amplitude, size=(n_coefficients, width))
    return ControlParams(kind=kind, omega=omega, beta=beta, n_intervals=n_intervals, degree=degree,
                         time_scale=time_scale, learnable_time_scale=learnable_time_scale,
                         antisymmetric=antisymmetric, gamma_shift=gamma_shift)


def param_count(params: ControlParams) -> int:
    m = params.width
    return params.n_coefficients * (m * m + m) + (1 if params.learnable_time_scale else 0)


def _layer_index(params: ControlParams, t: float) -> int:
    scaled = t * params.n_intervals
    index = round(scaled)
    if abs(scaled - index) > GRID_MATCH_TOLERANCE * max(1.0, scaled) or not 0 <= index < params.n_intervals:
        raise ValueError(f't={t} is not a layer time of a per-layer control with {params.n_intervals} layers')
    return index


def antisymmetrize(W: np.ndarray, gamma_shift: float) -> np.ndarray:
    """W - Wᵀ - γI, applied to the last two axes."""
    return W - np.swapaxes(W, -1, -2) - gamma_shift * np.eye(W.shape[-1])


def materialize(params: ControlParams, basis: Optional[SplineBasis], t: float) -> Tuple[Matrix, Vector]:
    """
    Evaluates the control (W(t), b(t)) at a reference time t in [0, 1].

    ``basis`` defaults to the control's own basis when None and is ignored by
    per-layer controls.

    A SpliNet sums the d+1 coefficients whose basis functions are active at t. A
    per-layer control only exists at its layer times t_i = i/N and returns (ω_i, β_i).

    Raises:
        ValueError: If a per-layer control is queried off its layer times.
    """
    if params.kind == 'per_layer':
        index = _layer_index(params, t)
        W, b = params.omega[index].copy(), params.beta[index].copy()
    else:
        basis = basis or params.basis
        W = np.zeros((params.width, params.width))
        b = np.zeros(params.width)
        for l, value in basis.active_basis(t):
            W += value * params.omega[basis.position(l)]
            b += value * params.beta[basis.position(l)]
    if params.antisymmetric:
        W = antisymmetrize(W, params.gamma_shift)
    return W, b


def check_grid(params: ControlParams, grid: TimeGrid):
    if params.kind == 'per_layer' and grid.n_steps != params.n_intervals:
        raise DimensionError(f'per-layer control has {params.n_intervals} layers but the grid has '
                             f'{grid.n_steps} steps; only spline controls can be re-discretized')


def coefficient_table(params: ControlParams, n_steps: int) -> np.ndarray:
    """
    Weights of every coefficient in every layer, shape (N, K).

    Layer i uses W_i = Σ_k table[i, k] ω_k. For a per-layer control this is the
    identity.
    """
    if params.kind == 'per_layer':
        return np.eye(params.n_coefficients)[:n_steps]
    return layer_table(params.basis, n_steps).dense()[:n_steps]


def active_coefficients(params: ControlParams, n_steps: int) -> Tuple[np.ndarray, np.ndarray]:
    """Positions and weights of the coefficients active in each layer, shapes (N, d+1)."""
    if params.kind == 'per_layer':
        return np.arange(n_steps)[:, None], np.ones((n_steps, 1))
    table = layer_table(params.basis, n_steps)
    return table.positions[:n_steps], table.values[:n_steps]


def layer_controls(params: ControlParams, grid: TimeGrid) -> Tuple[np.ndarray, np.ndarray]:
    """
    Materializes the controls of all N layers at once.

    Returns:
        Tuple[np.ndarray, np.ndarray]: Weights of shape (N, m, m) and biases of shape (N, m).
    """
    check_grid(params, grid)
    table = coefficient_table(params, grid.n_steps)
    weights = np.einsum('nk,kij->nij', table, params.omega)
    biases = table @ params.beta
    if params.antisymmetric:
        weights = antisymmetrize(weights, params.gamma_shift)
    return weights, biases
