import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from splinet.architecture.bspline import SplineBasis, evaluate_table, layer_table, sample_basis


def test_knots_are_uniform_and_extended():
    basis = SplineBasis(degree=2, n_intervals=5)
    knots = basis.extended_knots
    assert len(knots) == 5 + 2 * 2 + 1
    np.testing.assert_allclose(np.diff(knots), 0.2, atol=1e-15)
    assert basis.knot(0) == 0.0 and basis.knot(5) == 1.0
    assert list(basis.indices) == [-2, -1, 0, 1, 2, 3, 4]
    assert basis.n_basis == 7


@pytest.mark.parametrize('degree, n_intervals', [(-1, 3), (1, 0)])
def test_invalid_basis(degree, n_intervals):
    with pytest.raises(ValueError):
        SplineBasis(degree, n_intervals)


def test_degree_zero_is_an_indicator():
    basis = SplineBasis(0, 5)
    assert basis.eval_basis(0, 0.1) == 1.0
    assert basis.eval_basis(0, 0.25) == 0.0


def test_degree_one_is_a_hat():
    basis = SplineBasis(1, 5)
    assert basis.eval_basis(0, 0.2) == pytest.approx(1.0, abs=1e-15)
    assert basis.eval_basis(0, 0.1) == pytest.approx(0.5, abs=1e-15)


def test_quadratic_values_on_its_support():
    basis = SplineBasis(2, 10)
    # B^2_3 lives on [0.3, 0.6)
    assert basis.eval_basis(3, 0.4) == pytest.approx(0.5, abs=1e-12)
    assert basis.eval_basis(3, 0.5) == pytest.approx(0.5, abs=1e-12)
    assert basis.eval_basis(3, 0.45) == pytest.approx(0.75, abs=1e-12)


def test_eval_basis_index_out_of_range():
    basis = SplineBasis(1, 5)
    with pytest.raises(IndexError):
        basis.eval_basis(5, 0.5)
    with pytest.raises(IndexError):
        basis.eval_basis(-2, 0.5)


def test_find_interval():
    basis = SplineBasis(2, 5)
    assert basis.find_interval(0.0) == 0
    assert basis.find_interval(1.0) == 4
    assert basis.find_interval(0.41) == 2
    for t in (-0.01, 1.01, float('nan')):
        with pytest.raises(ValueError):
            basis.find_interval(t)


def test_find_interval_snaps_to_knots():
    basis = SplineBasis(1, 10)
    assert basis.find_interval(0.3) == 3
    assert basis.find_interval(0.1 + 0.2) == 3


@pytest.mark.parametrize('degree', [0, 1, 2, 3])
def test_active_basis_has_degree_plus_one_entries(degree):
    basis = SplineBasis(degree, 7)
    active = basis.active_basis(0.37)
    assert len(active) == degree + 1
    assert sum(value for _, value in active) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize('degree', [1, 2, 3])
def test_active_basis_matches_recursion(degree):
    basis = SplineBasis(degree, 6)
    for t in np.linspace(0.0, 1.0, 37):
        active = dict(basis.active_basis(float(t)))
        for l in basis.indices:
            assert basis.eval_basis(l, float(t)) == pytest.approx(active.get(l, 0.0), abs=1e-13)


@pytest.mark.parametrize('n_steps', [4, 10, 25])
def test_kronecker_property_on_aligned_knots(n_steps):
    basis = SplineBasis(1, n_steps)
    for i in range(n_steps + 1):
        t = i / n_steps
        for l in basis.indices:
            expected = 1.0 if l == i - 1 else 0.0
            assert abs(basis.eval_basis(l, t) - expected) < 1e-12
        active = {l: v for l, v in basis.active_basis(t) if v != 0.0}
        assert list(active) == [i - 1]
        assert abs(active[i - 1] - 1.0) < 1e-12


@pytest.mark.parametrize('degree', [1, 2, 3])
@pytest.mark.parametrize('n_intervals', list(range(2, 16)))
def test_partition_of_unity(degree, n_intervals):
    basis = SplineBasis(degree, n_intervals)
    times = np.random.default_rng(degree * 100 + n_intervals).uniform(0.0, 1.0, 1000)
    table = evaluate_table(basis, times).dense()
    assert np.max(np.abs(table.sum(axis=1) - 1.0)) < 1e-12
    assert np.all(table >= 0.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 3), st.integers(1, 12), st.floats(0.0, 1.0))
def test_local_support_and_non_negativity(degree, n_intervals, t):
    basis = SplineBasis(degree, n_intervals)
    distance = np.min(np.abs(basis.extended_knots - t))
    assume(distance == 0.0 or distance > 1e-9)
    for l in basis.indices:
        value = basis.eval_basis(l, t)
        assert value >= 0.0
        inside = basis.knot(l) <= t < basis.knot(l + degree + 1) or (t == 1.0 and l + degree + 1 >= n_intervals)
        if not inside:
            assert value == 0.0


def test_linear_basis_is_continuous_across_knots():
    basis = SplineBasis(1, 8)
    for j in range(1, 8):
        knot = basis.knot(j)
        for l in basis.indices:
            assert abs(basis.eval_basis(l, knot - 1e-11) - basis.eval_basis(l, knot + 1e-11)) < 1e-9


@pytest.mark.parametrize('degree', [2, 3])
def test_higher_degree_has_continuous_derivative(degree):
    basis = SplineBasis(degree, 8)
    step = 1e-6

    for j in range(1, 8):
        knot = basis.knot(j)
        for l in basis.indices:
            left = (basis.eval_basis(l, knot) - basis.eval_basis(l, knot - step)) / step
            right = (basis.eval_basis(l, knot + step) - basis.eval_basis(l, knot)) / step
            assert abs(left - right) < 1e-4


def test_layer_table_is_cached():
    basis = SplineBasis(2, 4)
    assert layer_table(basis, 16) is layer_table(SplineBasis(2, 4), 16)
    assert layer_table(basis, 16).values.shape == (17, 3)


def test_sample_basis_frame():
    frame = sample_basis(SplineBasis(1, 3), n_samples=11)
    assert list(frame.columns) == ['t', 'l', 'value']
    assert len(frame) == 11 * 4
    sums = frame.groupby('t')['value'].sum()
    np.testing.assert_allclose(sums.to_numpy(), 1.0, atol=1e-12)
