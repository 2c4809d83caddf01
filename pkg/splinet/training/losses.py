"""
Loss functions evaluated on the network output x_N, and the Tikhonov regularizer.

Every loss accepts a single output of shape (m,) or a batch of shape (batch, m) and
returns one value per sample; the matching ``*_gradient`` returns ∂ℓ/∂x_N with the
same shape as the output.
"""
from typing import Callable, Dict, Literal, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from splinet.architecture.control import ControlParams

LossKind = Literal['averaged_mse', 'softmax_xent']
LOSS_KINDS = ('averaged_mse', 'softmax_xent')


def loss_averaged_mse(xN: np.ndarray, y) -> np.ndarray:
    """½ (mean_j x_N,j - y)²."""
    return 0.5 * (np.mean(xN, axis=-1) - y) ** 2


def averaged_mse_gradient(xN: np.ndarray, y) -> np.ndarray:
    residual = np.mean(xN, axis=-1) - y
    return np.repeat(np.expand_dims(residual / xN.shape[-1], -1), xN.shape[-1], axis=-1)


def loss_softmax_xent(xN: np.ndarray, y_onehot: np.ndarray) -> np.ndarray:
    """-log softmax(x_N)_k for the true class k."""
    return -np.sum(y_onehot * log_softmax(xN, axis=-1), axis=-1)


def softmax_xent_gradient(xN: np.ndarray, y_onehot: np.ndarray) -> np.ndarray:
    return softmax(xN, axis=-1) - y_onehot


LOSSES: Dict[str, Tuple[Callable, Callable]] = {
    'averaged_mse': (loss_averaged_mse, averaged_mse_gradient),
    'softmax_xent': (loss_softmax_xent, softmax_xent_gradient),
}


def get_loss(kind: str) -> Tuple[Callable, Callable]:
    if kind not in LOSSES:
        raise ValueError(f'Invalid loss {kind}. Only {LOSS_KINDS} are acceptable.')
    return LOSSES[kind]


def regularizer(params: ControlParams, gamma: float) -> float:
    """γ (Σ‖ω_l‖²_F + Σ‖β_l‖²); the time scale is not penalized."""
    if gamma < 0:
        raise ValueError(f'gamma must be >= 0, got {gamma}')
    return gamma * (float(np.sum(params.omega ** 2)) + float(np.sum(params.beta ** 2)))
