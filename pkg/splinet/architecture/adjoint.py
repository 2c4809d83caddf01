import logging
from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import numpy as np

from splinet.architecture.control import (ControlParams, TimeGrid, active_coefficients, coefficient_table,
                                          param_count)
from splinet.architecture.dynamics import Activation, Trajectory, propagate
from splinet.training.losses import get_loss, regularizer
from splinet.utils.errors import DimensionError
from splinet.utils.linalg import Matrix, Vector, hadamard, matvec, outer_sum

logger = logging.getLogger(__name__)

AccumulationScheme = Literal['after', 'during']

# finite-difference steps accepted by gradient_check
EPSILON_RANGE = (1e-8, 1e-4)


@dataclass
class Gradients:
    """
    Gradient of the objective with respect to every trainable quantity of a control.

    ``d_omega`` and ``d_beta`` mirror ``ControlParams.omega`` and ``.beta``;
    ``d_lambda`` is 0 when the time scale is frozen.
    """
    d_omega: np.ndarray
    d_beta: np.ndarray
    d_lambda: float = 0.0

    def to_vector(self, learnable_time_scale: bool) -> np.ndarray:
        parts = [self.d_omega.ravel(), self.d_beta.ravel()]
        if learnable_time_scale:
            parts.append(np.array([self.d_lambda]))
        return np.concatenate(parts)


def seed_adjoint(xN: np.ndarray, target, loss_kind: str) -> np.ndarray:
    """z_N = ∂ℓ/∂x_N for the chosen loss, one row per sample of a batch."""
    _, gradient = get_loss(loss_kind)
    return gradient(np.asarray(xN, dtype=np.float64), target)


def adjoint_step(z_next: Vector, x: Vector, W: Matrix, b: Vector, h: float, time_scale: float,
                 activation: Activation, pre_activation: Optional[np.ndarray] = None) -> Vector:
    """
    z_i = (∂Φ/∂x_i)ᵀ z_{i+1} for the Euler layer Φ(x) = x + h λ σ(W x + b).

    Equals z_{i+1} + h λ Wᵀ (σ′(W x_i + b) ⊙ z_{i+1}). The forward pass caches W x_i + b
    and may hand it in as ``pre_activation``.
    """
    if pre_activation is None:
        pre_activation = matvec(W, x) + b
    delta = hadamard(activation.derivative(pre_activation), z_next)
    return z_next + h * time_scale * matvec(W.T, delta)


def accumulate_gradients(trajectory: Trajectory,
                         z_final: np.ndarray,
                         params: ControlParams,
                         activation: Activation,
                         gamma: float = 0.0,
                         scheme: AccumulationScheme = 'after') -> Gradients:
    """
    Runs the adjoint sweep backwards from z_N and collects the coefficient gradients.

    For layer i the weight gradient is h λ (σ′(W_i x_i + b_i) ⊙ z_{i+1}) x_iᵀ; a
    coefficient ω_l receives it weighted by B^d_l(t_i). With ``scheme='after'`` the
    per-layer gradients are stored and summed once the sweep is complete; with
    ``scheme='during'`` each layer adds into its d+1 active coefficients as the sweep
    proceeds. The regularization gradient 2γ ω_l, 2γ β_l is added at the end.

    Args:
        trajectory (Trajectory): Result of ``propagate`` for the same control.
        z_final (np.ndarray): Adjoint seed z_N, shaped like the network output.
        params (ControlParams): The control the trajectory was computed with.
        activation (Activation): σ used in the forward pass.
        gamma (float): Tikhonov weight.
        scheme (AccumulationScheme): 'after' or 'during'.

    Returns:
        Gradients: Same shapes as ``params``.

    Raises:
        DimensionError: If the trajectory does not belong to ``params``.
    """
    n_steps, m = trajectory.n_steps, params.width
    if trajectory.weights.shape != (n_steps, m, m) or trajectory.states.shape[-1] != m:
        raise DimensionError(f'trajectory of width {trajectory.states.shape[-1]} and {trajectory.weights.shape[0]} '
                             f'layers does not match a control of width {m}')
    if z_final.shape != trajectory.output.shape:
        raise DimensionError(f'adjoint seed of shape {z_final.shape} does not match output {trajectory.output.shape}')
    if scheme not in ('after', 'during'):
        raise ValueError(f'Invalid accumulation scheme {scheme}')

    h, time_scale = trajectory.grid.h, trajectory.time_scale
    z = z_final
    d_lambda = 0.0
    if scheme == 'after':
        layer_d_weights = np.empty((n_steps, m, m))
        layer_d_biases = np.empty((n_steps, m))
    else:
        positions, values = active_coefficients(params, n_steps)
        d_omega = np.zeros_like(params.omega)
        d_beta = np.zeros_like(params.beta)

    for i in reversed(range(n_steps)):
        pre = trajectory.pre_activations[i]
        delta = hadamard(activation.derivative(pre), z)
        d_weight = h * time_scale * outer_sum(delta, trajectory.states[i])
        d_bias = h * time_scale * delta.reshape(-1, m).sum(axis=0)
        if params.antisymmetric:
            d_weight = d_weight - d_weight.T
        if params.learnable_time_scale:
            d_lambda += h * float(np.sum(activation(pre) * z))
        z = adjoint_step(z, trajectory.states[i], trajectory.weights[i], trajectory.biases[i], h, time_scale,
                         activation, pre_activation=pre)

        if scheme == 'after':
            layer_d_weights[i] = d_weight
            layer_d_biases[i] = d_bias
        else:
            for position, value in zip(positions[i], values[i]):
                d_omega[position] += value * d_weight
                d_beta[position] += value * d_bias

    if scheme == 'after':
        table = coefficient_table(params, n_steps)
        d_omega = np.einsum('nk,nij->kij', table, layer_d_weights)
        d_beta = table.T @ layer_d_biases
    return Gradients(d_omega=d_omega + 2.0 * gamma * params.omega,
                     d_beta=d_beta + 2.0 * gamma * params.beta,
                     d_lambda=d_lambda)


def objective(params: ControlParams,
              x0: np.ndarray,
              targets,
              loss_kind: str,
              activation: Activation,
              grid: TimeGrid,
              gamma: float = 0.0) -> float:
    """Mean loss over the rows of ``x0`` plus the regularizer."""
    loss, _ = get_loss(loss_kind)
    trajectory = propagate(x0, params, grid, activation)
    return float(np.mean(loss(trajectory.output, targets))) + regularizer(params, gamma)


def loss_and_gradients(params: ControlParams,
                       x0: np.ndarray,
                       targets,
                       loss_kind: str,
                       activation: Activation,
                       grid: TimeGrid,
                       gamma: float = 0.0,
                       scheme: AccumulationScheme = 'after') -> Tuple[float, Gradients]:
    """
    Objective (mean data loss plus regularizer) and its exact gradient.

    Args:
        x0 (np.ndarray): Initial states, shape (m,) or (batch, m).
        targets: One target per sample.

    Returns:
        Tuple[float, Gradients]: Objective value and gradient.
    """
    loss, _ = get_loss(loss_kind)
    trajectory = propagate(x0, params, grid, activation)
    n_samples = 1 if trajectory.output.ndim == 1 else trajectory.output.shape[0]
    value = float(np.mean(loss(trajectory.output, targets))) + regularizer(params, gamma)
    z_final = seed_adjoint(trajectory.output, targets, loss_kind) / n_samples
    return value, accumulate_gradients(trajectory, z_final, params, activation, gamma, scheme)


@dataclass
class GradientCheckReport:
    max_relative_error: float
    worst_parameter: int
    n_parameters: int
    epsilon: float
    d_lambda: float
    analytic: np.ndarray
    numeric: np.ndarray

    def passed(self, tolerance: float = 1e-6) -> bool:
        return self.max_relative_error < tolerance


def gradient_check(params: ControlParams,
                   x0: np.ndarray,
                   targets,
                   loss_kind: str,
                   activation: Activation,
                   grid: TimeGrid,
                   gamma: float = 0.0,
                   epsilon: float = 1e-6,
                   analytic: Optional[Gradients] = None) -> GradientCheckReport:
    """
    Compares the adjoint gradient with central finite differences.

    Every trainable scalar, including a learnable λ, is perturbed by ±epsilon. The
    error of scalar k is |g_k - f_k| / max(1, |f_k|).

    Args:
        epsilon (float): Perturbation in [1e-8, 1e-4].
        analytic (Optional[Gradients]): Gradient to check; computed by
            ``loss_and_gradients`` when omitted.

    Returns:
        GradientCheckReport: Largest error and where it occurred.
    """
    if not EPSILON_RANGE[0] <= epsilon <= EPSILON_RANGE[1]:
        raise ValueError(f'epsilon must lie in {list(EPSILON_RANGE)}, got {epsilon}')
    if analytic is None:
        _, analytic = loss_and_gradients(params, x0, targets, loss_kind, activation, grid, gamma)
    analytic_vector = analytic.to_vector(params.learnable_time_scale)
    if analytic_vector.shape != (param_count(params),):
        raise DimensionError(f'gradient has {analytic_vector.size} entries, control has {param_count(params)}')

    base = params.to_vector()
    numeric = np.empty_like(base)
    for k in range(base.size):
        shifted = base.copy()
        shifted[k] = base[k] + epsilon
        forward = objective(params.from_vector(shifted), x0, targets, loss_kind, activation, grid, gamma)
        shifted[k] = base[k] - epsilon
        backward = objective(params.from_vector(shifted), x0, targets, loss_kind, activation, grid, gamma)
        numeric[k] = (forward - backward) / (2.0 * epsilon)

    errors = np.abs(analytic_vector - numeric) / np.maximum(1.0, np.abs(numeric))
    worst = int(np.argmax(errors))
    logger.info('gradient check over %d parameters: max relative error %.3e at index %d',
                base.size, errors[worst], worst)
    return GradientCheckReport(max_relative_error=float(errors[worst]),
                               worst_parameter=worst,
                               n_parameters=base.size,
                               epsilon=epsilon,
                               d_lambda=analytic.d_lambda,
                               analytic=analytic_vector,
                               numeric=numeric)
