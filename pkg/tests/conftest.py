import numpy as np
import pytest

from splinet.architecture.control import ControlParams, init_random
from splinet.architecture.dynamics import Activation
from splinet.utils.config import Config


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tanh():
    return Activation('tanh')


@pytest.fixture
def small_spline() -> ControlParams:
    """Width 4, d = 2, L = 3 spline control with a learnable time scale."""
    return init_random('splinet', 4, seed=3, amplitude=0.5, n_intervals=3, degree=2,
                       time_scale=1.3, learnable_time_scale=True)


@pytest.fixture
def sin_config() -> Config:
    return Config.from_dict({
        'problem': {'kind': 'sin', 'frequency': 1.0},
        'network': {'N': 20, 'control_kind': 'splinet', 'degree': 1, 'L': 4},
        'training': {'eta': 0.05, 'gamma': 1e-8, 'epochs': 3, 'batch_size': 5, 'seed': 0},
    })


def _aligned_pair(n_steps: int, width: int, seed: int):
    """A degree-1 spline whose knots sit on the N layer times and the per-layer control it reduces to."""
    spline = init_random('splinet', width, seed=seed, amplitude=0.8, n_intervals=n_steps, degree=1)
    per_layer = ControlParams(kind='per_layer', omega=spline.omega[:n_steps].copy(),
                              beta=spline.beta[:n_steps].copy(), n_intervals=n_steps)
    return spline, per_layer


@pytest.fixture
def aligned_pair():
    return _aligned_pair

