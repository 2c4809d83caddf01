"""
Forward Euler stability diagnostic.

Along the trajectory of a probe input, every layer contributes the Jacobian
diag(σ′(W_i x_i + b_i)) W_i. Euler propagation is stable when every eigenvalue z of
the step-scaled Jacobian h λ diag(σ′) W_i lies in the disk |1 + z| <= 1.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from splinet.architecture.control import ControlParams, TimeGrid
from splinet.architecture.dynamics import Activation, propagate, scaled_jacobian
from splinet.utils.linalg import eigenvalues

logger = logging.getLogger(__name__)

DEFAULT_STEP_SIZES = (0.04, 0.01, 0.0025)
# slack on the boundary of the stability disk
DISK_TOLERANCE = 1e-12


def in_stability_disk(z: np.ndarray) -> np.ndarray:
    """|1 + z| <= 1, elementwise."""
    return np.abs(1.0 + np.asarray(z)) <= 1.0 + DISK_TOLERANCE


@dataclass
class SpectrumReport:
    """
    Per-layer spectra of one network along one probe trajectory.

    ``unscaled`` holds the eigenvalues of diag(σ′) W_i, ``scaled`` the eigenvalues of
    h λ diag(σ′) W_i; both have shape (N, m). ``inside`` flags the scaled ones.
    """
    step_size: float
    time_scale: float
    probe: np.ndarray
    unscaled: np.ndarray
    scaled: np.ndarray
    inside: np.ndarray

    @property
    def fraction_inside(self) -> float:
        return float(np.mean(self.inside))

    @property
    def all_inside(self) -> bool:
        return bool(np.all(self.inside))

    def to_frame(self) -> pd.DataFrame:
        n_layers, m = self.scaled.shape
        return pd.DataFrame({
            'layer': np.repeat(np.arange(n_layers), m),
            're': self.scaled.real.ravel(),
            'im': self.scaled.imag.ravel(),
            'inside_disk': self.inside.ravel(),
            're_unscaled': self.unscaled.real.ravel(),
            'im_unscaled': self.unscaled.imag.ravel(),
        })

    def to_dict(self) -> Dict[str, Any]:
        return {'step_size': self.step_size, 'time_scale': self.time_scale, 'probe': self.probe.tolist(),
                'fraction_inside': self.fraction_inside, 'all_inside': self.all_inside}


def stability_spectrum(params: ControlParams,
                       grid: TimeGrid,
                       activation: Activation,
                       x0: np.ndarray) -> SpectrumReport:
    """
    Propagates the probe x0 and computes the spectrum of every layer Jacobian.

    Args:
        params (ControlParams): The control.
        grid (TimeGrid): Layer count and step size h.
        activation (Activation): σ.
        x0 (np.ndarray): Probe initial state of shape (m,).

    Returns:
        SpectrumReport: Eigenvalues before and after scaling with h λ, and disk membership.

    Raises:
        EigenvalueError: If the eigensolver fails on a layer.
        DivergenceError: If the probe trajectory blows up.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    trajectory = propagate(x0, params, grid, activation)
    m = params.width
    unscaled = np.empty((grid.n_steps, m), dtype=np.complex128)
    for i in range(grid.n_steps):
        # h = λ = 1 gives the unscaled layer Jacobian
        jacobian = scaled_jacobian(trajectory.states[i], trajectory.weights[i], trajectory.biases[i], 1.0, 1.0,
                                   activation)
        unscaled[i] = eigenvalues(jacobian)
    scaled = grid.h * params.time_scale * unscaled
    inside = in_stability_disk(scaled)
    logger.debug(f'spectrum at h={grid.h:g}: {np.count_nonzero(inside)}/{inside.size} eigenvalues inside the disk')
    return SpectrumReport(step_size=grid.h, time_scale=params.time_scale, probe=x0.copy(),
                          unscaled=unscaled, scaled=scaled, inside=inside)


def grid_for_step_size(step_size: float) -> TimeGrid:
    """Grid with h = step_size on the reference domain; 1/h must be an integer."""
    n_steps = int(round(1.0 / step_size))
    if n_steps < 1 or abs(n_steps * step_size - 1.0) > 1e-9:
        raise ValueError(f'step size {step_size} does not divide the unit interval')
    return TimeGrid(n_steps)


def spectrum_scan(params: ControlParams,
                  activation: Activation,
                  x0: np.ndarray,
                  step_sizes: Sequence[float] = DEFAULT_STEP_SIZES) -> List[SpectrumReport]:
    """
    The same spline control diagnosed on several step sizes.

    Returns:
        List[SpectrumReport]: One report per step size, in the given order.
    """
    reports = [stability_spectrum(params, grid_for_step_size(h), activation, x0) for h in step_sizes]
    for report in reports:
        logger.info(f'h={report.step_size:g}: {100 * report.fraction_inside:.1f}% of the eigenvalues are stable')
    return reports


def scan_frame(reports: Sequence[SpectrumReport]) -> pd.DataFrame:
    return pd.DataFrame({
        'h': [r.step_size for r in reports],
        'n_eigenvalues': [r.inside.size for r in reports],
        'fraction_inside': [r.fraction_inside for r in reports],
        'max_abs_1_plus_z': [float(np.max(np.abs(1.0 + r.scaled))) for r in reports],
    })
