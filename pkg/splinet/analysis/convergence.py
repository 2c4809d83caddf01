import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Sequence

import numpy as np
import pandas as pd

from splinet.architecture.control import ControlParams, TimeGrid, materialize
from splinet.architecture.dynamics import Activation, propagate
from splinet.utils.errors import DimensionError
from splinet.utils.linalg import matvec

logger = logging.getLogger(__name__)

DEFAULT_STEP_COUNTS = (25, 50, 100, 200, 400, 800)
REFERENCE_STEP = 1e-4


@dataclass
class ConvergenceReport:
    """
    Error of the Euler network output against a fine Runge-Kutta solution.

    Attributes:
        step_sizes (np.ndarray): h = 1/N, strictly decreasing.
        n_steps (np.ndarray): The matching layer counts N.
        errors (np.ndarray): ‖x_N(h) - x_ref‖₂ for every h.
        slope (float): Least-squares slope of log(error) over log(h); NaN if an error is 0.
        reference (dict): Method and step of the reference solution.
    """
    step_sizes: np.ndarray
    n_steps: np.ndarray
    errors: np.ndarray
    slope: float
    reference: Dict[str, Any] = field(default_factory=dict)

    def error_ratios(self) -> np.ndarray:
        """error(h_k) / error(h_{k+1}) for consecutive step sizes."""
        return self.errors[:-1] / self.errors[1:]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'h': self.step_sizes, 'N': self.n_steps, 'error': self.errors})

    def to_dict(self) -> Dict[str, Any]:
        return {'slope': None if np.isnan(self.slope) else float(self.slope),
                'reference': dict(self.reference),
                'h': self.step_sizes.tolist(), 'N': self.n_steps.tolist(), 'error': self.errors.tolist()}


def fit_order(step_sizes: Sequence[float], errors: Sequence[float]) -> float:
    """Slope of the least-squares line through (log h, log error)."""
    step_sizes, errors = np.asarray(step_sizes, dtype=np.float64), np.asarray(errors, dtype=np.float64)
    if np.any(errors <= 0) or len(errors) < 2:
        return float('nan')
    slope, _ = np.polyfit(np.log(step_sizes), np.log(errors), 1)
    return float(slope)


def reference_solution(params: ControlParams,
                       x0: np.ndarray,
                       activation: Activation,
                       reference_step: float = REFERENCE_STEP) -> np.ndarray:
    """
    x(1) of the continuous network, integrated with the classical 4th-order Runge-Kutta scheme.

    The spline control is evaluated exactly at every stage time, so the only error is
    the Runge-Kutta truncation error at ``reference_step``.
    """
    n_reference = max(1, int(round(1.0 / reference_step)))
    dt = 1.0 / n_reference
    basis = params.basis
    controls = [materialize(params, basis, k / (2 * n_reference)) for k in range(2 * n_reference + 1)]
    weights = np.stack([W for W, _ in controls])
    biases = np.stack([b for _, b in controls])
    time_scale = params.time_scale

    def rhs(k, x):
        return time_scale * activation(matvec(weights[k], x) + biases[k])

    x = np.array(x0, dtype=np.float64)
    for i in range(n_reference):
        k = 2 * i
        k1 = rhs(k, x)
        k2 = rhs(k + 1, x + 0.5 * dt * k1)
        k3 = rhs(k + 1, x + 0.5 * dt * k2)
        k4 = rhs(k + 2, x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def convergence_study(params: ControlParams,
                      x0: np.ndarray,
                      n_steps_list: Sequence[int] = DEFAULT_STEP_COUNTS,
                      activation: Activation = Activation('tanh'),
                      reference_step: float = REFERENCE_STEP) -> ConvergenceReport:
    """
    Measures how the Euler output error shrinks with the step size h = 1/N.

    Args:
        params (ControlParams): A spline control; it is evaluated at the layer times of every grid.
        x0 (np.ndarray): Initial state of shape (m,).
        n_steps_list (Sequence[int]): Layer counts N, at least two distinct values.
        activation (Activation): σ.
        reference_step (float): Runge-Kutta step of the reference solution.

    Returns:
        ConvergenceReport: Errors ordered by decreasing h and the fitted order.

    Raises:
        DimensionError: For a per-layer control, which has no values between its layers.
    """
    if params.kind != 'splinet':
        raise DimensionError('only spline controls can be evaluated on other grids')
    n_steps = np.array(sorted(set(int(n) for n in n_steps_list)))
    if len(n_steps) < 2 or n_steps[0] < 1:
        raise ValueError(f'need at least two distinct positive step counts, got {list(n_steps_list)}')

    x_reference = reference_solution(params, x0, activation, reference_step)
    errors = np.array([np.linalg.norm(propagate(x0, params, TimeGrid(int(n)), activation).output - x_reference)
                       for n in n_steps])
    step_sizes = 1.0 / n_steps
    slope = fit_order(step_sizes, errors)
    logger.info(f'convergence study over N={n_steps.tolist()}: fitted order {slope:.4f}')
    return ConvergenceReport(step_sizes=step_sizes, n_steps=n_steps, errors=errors, slope=slope,
                             reference={'method': 'rk4', 'step': 1.0 / max(1, int(round(1.0 / reference_step)))})
