"""
Dense linear algebra on 64-bit arrays.

Matrices and vectors are plain ``numpy`` arrays of dtype float64. The helpers
here add the shape checks the network code relies on; ``matvec`` and
``hadamard`` also accept a leading batch axis so one call serves a single state
or a stack of states.
"""
import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from splinet.utils.errors import DimensionError, EigenvalueError

Matrix = NDArray[np.float64]
Vector = NDArray[np.float64]


def as_matrix(data, name: str = 'matrix') -> Matrix:
    matrix = np.asarray(data, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise DimensionError(f'{name} must be a non-empty 2-D array, got shape {matrix.shape}')
    return matrix


def as_vector(data, name: str = 'vector') -> Vector:
    vector = np.asarray(data, dtype=np.float64)
    if vector.ndim != 1 or vector.shape[0] < 1:
        raise DimensionError(f'{name} must be a non-empty 1-D array, got shape {vector.shape}')
    return vector


def matvec(A: Matrix, v: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    Matrix-vector product ``A v``.

    Args:
        A (Matrix): Array of shape (rows, cols).
        v (NDArray): Array of shape (cols,) or a batch of shape (batch, cols).

    Returns:
        NDArray: ``A v`` of shape (rows,), or one product per batch row.

    Raises:
        DimensionError: If ``A.cols != v.len``.
    """
    if A.ndim != 2 or A.shape[1] != v.shape[-1]:
        raise DimensionError(f'cannot multiply matrix of shape {A.shape} with vector of shape {v.shape}')
    return v @ A.T


def hadamard(a: NDArray[np.float64], b: NDArray[np.float64]) -> NDArray[np.float64]:
    """Elementwise product of two arrays of identical shape."""
    if a.shape != b.shape:
        raise DimensionError(f'hadamard product needs equal shapes, got {a.shape} and {b.shape}')
    return a * b


def outer(a: Vector, b: Vector) -> Matrix:
    """Rank-1 matrix ``a bᵀ`` of shape (len(a), len(b))."""
    return np.outer(as_vector(a, 'a'), as_vector(b, 'b'))


def outer_sum(a: NDArray[np.float64], b: NDArray[np.float64]) -> Matrix:
    """
    Sum of the outer products of matching rows, ``Σ_k a_k b_kᵀ``.

    A pair of vectors gives their plain outer product.
    """
    if a.shape[:-1] != b.shape[:-1]:
        raise DimensionError(f'outer_sum needs matching leading shapes, got {a.shape} and {b.shape}')
    return np.einsum('...i,...j->ij', a, b)


def eigenvalues(A: Matrix) -> NDArray[np.complex128]:
    """
    All eigenvalues of a small real square matrix.

    Uses LAPACK's dense non-symmetric driver (Hessenberg reduction followed by
    shifted QR iteration), which returns complex eigenvalues as adjacent
    conjugate pairs.

    Args:
        A (Matrix): Square array.

    Returns:
        NDArray[np.complex128]: The ``n`` eigenvalues of ``A``.

    Raises:
        DimensionError: If ``A`` is not square.
        EigenvalueError: If the iteration does not converge or ``A`` is not finite.
    """
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f'eigenvalues need a square matrix, got shape {A.shape}')
    if not np.all(np.isfinite(A)):
        raise EigenvalueError(A, 'on a matrix with non-finite entries')
    try:
        values = scipy.linalg.eigvals(A, check_finite=False)
    except scipy.linalg.LinAlgError as error:
        raise EigenvalueError(A, f'({error})') from error
    return values.astype(np.complex128)
