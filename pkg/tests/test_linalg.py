import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from splinet.utils.errors import DimensionError, EigenvalueError
from splinet.utils.linalg import eigenvalues, hadamard, matvec, outer, outer_sum

square_matrices = st.integers(1, 5).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(-10, 10, allow_nan=False, allow_infinity=False)))


def test_matvec_examples():
    np.testing.assert_array_equal(matvec(np.eye(3), np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(matvec(np.zeros((2, 2)), np.array([4.0, 5.0])), [0.0, 0.0])
    np.testing.assert_array_equal(matvec(np.array([[1.0, 2.0], [3.0, 4.0]]), np.ones(2)), [3.0, 7.0])


def test_matvec_batch_applies_row_by_row(rng):
    A = rng.normal(size=(3, 3))
    batch = rng.normal(size=(5, 3))
    expected = np.stack([A @ v for v in batch])
    np.testing.assert_allclose(matvec(A, batch), expected, rtol=0, atol=1e-14)


def test_matvec_dimension_mismatch():
    with pytest.raises(DimensionError):
        matvec(np.eye(3), np.ones(2))


def test_hadamard_examples():
    np.testing.assert_array_equal(hadamard(np.array([1.0, 2.0]), np.array([3.0, 4.0])), [3.0, 8.0])
    v = np.array([0.3, -2.0, 5.0])
    np.testing.assert_array_equal(hadamard(v, np.ones(3)), v)
    np.testing.assert_array_equal(hadamard(v, np.zeros(3)), np.zeros(3))
    with pytest.raises(DimensionError):
        hadamard(np.ones(2), np.ones(3))


def test_outer_examples():
    np.testing.assert_array_equal(outer(np.array([1.0, 0.0]), np.array([0.0, 1.0])), [[0.0, 1.0], [0.0, 0.0]])
    np.testing.assert_array_equal(outer(np.zeros(2), np.array([1.0, 2.0, 3.0])), np.zeros((2, 3)))
    np.testing.assert_array_equal(outer(np.array([2.0]), np.array([3.0])), [[6.0]])


def test_outer_sum_adds_row_products(rng):
    a, b = rng.normal(size=(4, 3)), rng.normal(size=(4, 2))
    expected = sum(np.outer(a[k], b[k]) for k in range(4))
    np.testing.assert_allclose(outer_sum(a, b), expected, atol=1e-14)


def _sorted(values):
    return sorted(values, key=lambda z: (round(z.real, 9), round(z.imag, 9)))


def test_eigenvalue_examples():
    np.testing.assert_allclose(_sorted(eigenvalues(np.diag([1.0, 2.0, 3.0]))), [1, 2, 3], atol=1e-12)
    rotation = np.array([[0.0, 1.0], [-1.0, 0.0]])
    np.testing.assert_allclose(_sorted(eigenvalues(rotation)), [-1j, 1j], atol=1e-12)
    np.testing.assert_allclose(_sorted(eigenvalues(rotation - 0.5 * np.eye(2))), [-0.5 - 1j, -0.5 + 1j], atol=1e-12)


def test_eigenvalues_reject_bad_input():
    with pytest.raises(DimensionError):
        eigenvalues(np.ones((2, 3)))
    with pytest.raises(EigenvalueError) as info:
        eigenvalues(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    assert np.isnan(info.value.matrix[0, 0])


@settings(max_examples=60, deadline=None)
@given(square_matrices)
def test_eigenvalues_sum_to_trace(A):
    values = eigenvalues(A)
    assert len(values) == A.shape[0]
    assert abs(values.sum() - np.trace(A)) <= 1e-9 * max(1.0, np.linalg.norm(A))


@settings(max_examples=60, deadline=None)
@given(square_matrices)
def test_antisymmetric_spectrum_is_imaginary(A):
    values = eigenvalues(A - A.T)
    assert np.all(np.abs(values.real) < 1e-9 * max(1.0, np.linalg.norm(A)))


@pytest.mark.parametrize('gamma', [0.1, 1.0])
def test_shift_moves_every_eigenvalue(rng, gamma):
    for _ in range(20):
        A = rng.normal(size=(4, 4))
        shifted = eigenvalues(A - gamma * np.eye(4))
        original = eigenvalues(A) - gamma
        distances = np.abs(shifted[:, None] - original[None, :]).min(axis=1)
        assert np.all(distances < 1e-9)


def test_product_matches_determinant(rng):
    for n in (2, 3):
        A = rng.normal(size=(n, n))
        assert abs(np.prod(eigenvalues(A)) - np.linalg.det(A)) < 1e-9
