from typing import Optional

import numpy as np


class SplinetError(Exception):
    """Base class of every error raised by the package."""


class ConfigError(SplinetError, ValueError):
    """
    Raised when a configuration document is inconsistent.

    Args:
        path (str): Dotted path of the offending entry, e.g. ``network.degree``.
        message (str): What is wrong with it.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f'{path}: {message}')


class DimensionError(SplinetError, ValueError):
    """Raised on incompatible array shapes."""


class NumericalError(SplinetError, ArithmeticError):
    """Raised when a computation produces no usable number."""


class DivergenceError(NumericalError):
    """
    Raised when forward propagation or the loss becomes non-finite.

    Args:
        message (str): Description of the failure.
        step (Optional[int]): Index of the layer at which the state blew up.
    """

    def __init__(self, message: str, step: Optional[int] = None):
        self.step = step
        super().__init__(message if step is None else f'{message} (step {step})')


class EigenvalueError(NumericalError):
    """
    Raised when the dense eigensolver does not converge.

    Args:
        matrix (np.ndarray): The matrix whose spectrum was requested.
    """

    def __init__(self, matrix: np.ndarray, reason: str = ''):
        self.matrix = np.array(matrix, copy=True)
        text = np.array2string(self.matrix, precision=6)
        super().__init__(f'eigenvalue iteration did not converge {reason}\n{text}'.strip())
