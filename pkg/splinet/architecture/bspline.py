import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

# relative distance below which a time is treated as sitting on a knot
KNOT_SNAP_TOLERANCE = 1e-12

"""
SplineBasis: uniform B-spline basis functions of degree d on [0, T].

The L intervals of [0, T] are split by the knots τ_0 = 0, ..., τ_L = T with spacing
T/L. The grid is extended uniformly by d knots on both sides so that the L+d basis
functions B^d_l, l = -d, ..., L-1, form a partition of unity on [0, T]. Intervals are
half-open, [τ_l, τ_{l+1}); the right end point T belongs to the last interval and is
evaluated as a left limit.

Attributes:
    degree (int): Polynomial degree d >= 0.
    n_intervals (int): Number L >= 1 of knot intervals covering [0, T].
    final_time (float): End point T of the domain (1.0 on the reference domain).

Methods:
    knot(j): Position of the extended knot τ_j.
    find_interval(t): Index k0 of the interval containing t.
    eval_basis(l, t): B^d_l(t) through the Cox-de Boor recursion.
    active_basis(t): The d+1 non-zero basis functions at t with their values.
"""


@dataclass(frozen=True)
class SplineBasis:
    degree: int
    n_intervals: int
    final_time: float = 1.0
    extended_knots: np.ndarray = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError(f'degree must be >= 0, got {self.degree}')
        if self.n_intervals < 1:
            raise ValueError(f'n_intervals must be >= 1, got {self.n_intervals}')
        if not self.final_time > 0:
            raise ValueError(f'final_time must be positive, got {self.final_time}')
        knots = np.array([self.knot(j) for j in range(-self.degree, self.n_intervals + self.degree + 1)])
        object.__setattr__(self, 'extended_knots', knots)

    @property
    def spacing(self) -> float:
        return self.final_time / self.n_intervals

    @property
    def n_basis(self) -> int:
        """Number of basis functions, L + d."""
        return self.n_intervals + self.degree

    @property
    def indices(self) -> range:
        """Basis indices l = -d, ..., L-1."""
        return range(-self.degree, self.n_intervals)

    def knot(self, j: int) -> float:
        # same index * T / count form as TimeGrid so aligned knots and layers compare equal
        return j * self.final_time / self.n_intervals

    def position(self, l: int) -> int:
        """Array position of basis index l in a coefficient list (l + d)."""
        return l + self.degree

    def _snap(self, t: float) -> Tuple[int, float]:
        """Interval index of t and the time to evaluate at (a knot when t sits on one)."""
        if not (0.0 <= t <= self.final_time) or math.isnan(t):
            raise ValueError(f't={t} lies outside [0, {self.final_time}]')
        scaled = t * self.n_intervals / self.final_time
        nearest = round(scaled)
        if abs(scaled - nearest) <= KNOT_SNAP_TOLERANCE * max(1.0, scaled):
            k0, t = nearest, self.knot(nearest)
        else:
            k0 = math.floor(scaled)
        return min(k0, self.n_intervals - 1), t

    def find_interval(self, t: float) -> int:
        """
        Index k0 in {0, ..., L-1} with τ_k0 <= t < τ_k0+1; t = T returns L-1.

        Raises:
            ValueError: If t lies outside [0, T].
        """
        return self._snap(t)[0]

    def eval_basis(self, l: int, t: float) -> float:
        """
        Evaluates B^d_l(t) by the Cox-de Boor recursion.

        Args:
            l (int): Basis index in {-d, ..., L-1}.
            t (float): Time in [0, T].

        Returns:
            float: The basis value, 0 outside the support [τ_l, τ_{l+d+1}).

        Raises:
            IndexError: If l is out of range.
        """
        if l not in self.indices:
            raise IndexError(f'basis index {l} outside [{-self.degree}, {self.n_intervals - 1}]')
        k0, t = self._snap(t)
        return self._cox_de_boor(l, self.degree, t, k0)

    def _cox_de_boor(self, j: int, p: int, t: float, k0: int) -> float:
        if p == 0:
            # degree zero: indicator of the interval found for t (left limit at T)
            return 1.0 if j == k0 else 0.0
        if not (j <= k0 <= j + p):
            return 0.0
        left = (t - self.knot(j)) / (self.knot(j + p) - self.knot(j))
        right = (self.knot(j + p + 1) - t) / (self.knot(j + p + 1) - self.knot(j + 1))
        return left * self._cox_de_boor(j, p - 1, t, k0) + right * self._cox_de_boor(j + 1, p - 1, t, k0)

    def active_basis(self, t: float) -> List[Tuple[int, float]]:
        """
        The d+1 basis functions that do not vanish at t.

        Uses the triangular form of the Cox-de Boor recursion, which produces all
        non-zero values on the interval [τ_k0, τ_k0+1) at once.

        Returns:
            List[Tuple[int, float]]: Pairs (l, B^d_l(t)) for l = k0-d, ..., k0.
        """
        k0, t = self._snap(t)
        p = self.degree
        values = np.zeros(p + 1)
        left = np.zeros(p + 1)
        right = np.zeros(p + 1)
        values[0] = 1.0
        for j in range(1, p + 1):
            left[j] = t - self.knot(k0 + 1 - j)
            right[j] = self.knot(k0 + j) - t
            saved = 0.0
            for r in range(j):
                temp = values[r] / (right[r + 1] + left[j - r])
                values[r] = saved + right[r + 1] * temp
                saved = left[j - r] * temp
            values[j] = saved
        return [(k0 - p + r, float(values[r])) for r in range(p + 1)]


"""
BasisTable: basis values of every active function at a fixed list of times.

Row i holds the d+1 array positions (l + d) of the functions active at times[i] and
their values. Tables for the layer times of a TimeGrid are constants of a network
configuration, so `layer_table` caches them.
"""


@dataclass(frozen=True)
class BasisTable:
    times: np.ndarray
    positions: np.ndarray
    values: np.ndarray
    n_basis: int

    def dense(self) -> np.ndarray:
        """Matrix of shape (len(times), L+d) with entry B^d_l(times[i]) at column l+d."""
        table = np.zeros((len(self.times), self.n_basis))
        rows = np.repeat(np.arange(len(self.times)), self.positions.shape[1])
        table[rows, self.positions.ravel()] = self.values.ravel()
        return table


def evaluate_table(basis: SplineBasis, times: Sequence[float]) -> BasisTable:
    times = np.asarray(times, dtype=np.float64)
    positions = np.empty((len(times), basis.degree + 1), dtype=np.int64)
    values = np.empty((len(times), basis.degree + 1))
    for i, t in enumerate(times):
        for r, (l, value) in enumerate(basis.active_basis(float(t))):
            positions[i, r] = basis.position(l)
            values[i, r] = value
    for array in (times, positions, values):
        array.setflags(write=False)
    return BasisTable(times=times, positions=positions, values=values, n_basis=basis.n_basis)


@lru_cache(maxsize=128)
def layer_table(basis: SplineBasis, n_steps: int) -> BasisTable:
    """Cached table at the layer times i/N, i = 0, ..., N, of the reference domain."""
    times = [i * basis.final_time / n_steps for i in range(n_steps + 1)]
    return evaluate_table(basis, times)


def sample_basis(basis: SplineBasis, n_samples: int = 201) -> pd.DataFrame:
    """
    Every basis function on an equispaced sample of [0, T], for plotting.

    Returns:
        pd.DataFrame: Long format with columns ``t``, ``l``, ``value``.
    """
    if n_samples < 2:
        raise ValueError(f'n_samples must be >= 2, got {n_samples}')
    rows = []
    for t in np.linspace(0.0, basis.final_time, n_samples):
        active = dict(basis.active_basis(float(t)))
        for l in basis.indices:
            rows.append((float(t), l, active.get(l, 0.0)))
    return pd.DataFrame(rows, columns=['t', 'l', 'value'])
