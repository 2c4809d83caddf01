from dataclasses import dataclass

import numpy as np

from splinet.architecture.adjoint import Gradients
from splinet.architecture.control import ControlParams
from splinet.utils.errors import DimensionError


@dataclass
class AdamState:
    """
    Moment estimates of the ADAM optimizer, one pair per parameter group.

    Attributes:
        m_omega, v_omega, m_beta, v_beta (np.ndarray): First and second moments.
        m_lambda, v_lambda (float): Moments of the time scale.
        step (int): Number of updates taken so far.
    """
    m_omega: np.ndarray
    v_omega: np.ndarray
    m_beta: np.ndarray
    v_beta: np.ndarray
    m_lambda: float = 0.0
    v_lambda: float = 0.0
    step: int = 0

    @classmethod
    def zeros_like(cls, params: ControlParams) -> 'AdamState':
        return cls(m_omega=np.zeros_like(params.omega), v_omega=np.zeros_like(params.omega),
                   m_beta=np.zeros_like(params.beta), v_beta=np.zeros_like(params.beta))


def _moment_update(param, grad, m, v, beta1, beta2, step_size, bias_correction2, eps):
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * (grad * grad)
    param = param - step_size * m / (np.sqrt(v / bias_correction2) + eps)
    return param, m, v


def adam_step(params: ControlParams,
              grads: Gradients,
              state: AdamState,
              eta: float,
              beta1: float = 0.9,
              beta2: float = 0.999,
              eps: float = 1e-8) -> ControlParams:
    """
    One bias-corrected ADAM update.

    Updates ``params`` and ``state`` in place and returns ``params``. A frozen time
    scale is left untouched.

    Args:
        params (ControlParams): Control to update.
        grads (Gradients): Gradient of the objective at ``params``.
        state (AdamState): Moments matching the shapes of ``params``.
        eta (float): Learning rate.

    Raises:
        DimensionError: If the state does not match the parameters.
    """
    if state.m_omega.shape != params.omega.shape or state.m_beta.shape != params.beta.shape:
        raise DimensionError(f'optimizer state of shape {state.m_omega.shape} does not match '
                             f'parameters of shape {params.omega.shape}')
    state.step += 1
    bias_correction1 = 1.0 - beta1 ** state.step
    bias_correction2 = 1.0 - beta2 ** state.step
    step_size = eta / bias_correction1

    params.omega, state.m_omega, state.v_omega = _moment_update(
        params.omega, grads.d_omega, state.m_omega, state.v_omega, beta1, beta2, step_size, bias_correction2, eps)
    params.beta, state.m_beta, state.v_beta = _moment_update(
        params.beta, grads.d_beta, state.m_beta, state.v_beta, beta1, beta2, step_size, bias_correction2, eps)
    if params.learnable_time_scale:
        time_scale, state.m_lambda, state.v_lambda = _moment_update(
            params.time_scale, grads.d_lambda, state.m_lambda, state.v_lambda,
            beta1, beta2, step_size, bias_correction2, eps)
        params.time_scale = float(time_scale)
    return params


def gradient_descent_step(params: ControlParams, grads: Gradients, eta: float) -> ControlParams:
    """Plain step θ ← θ - η ∇; used to probe the descent property."""
    params.omega = params.omega - eta * grads.d_omega
    params.beta = params.beta - eta * grads.d_beta
    if params.learnable_time_scale:
        params.time_scale = params.time_scale - eta * grads.d_lambda
    return params
