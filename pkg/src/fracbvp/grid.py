"""Uniform grids on [0, 1] and the sampled functions that live on them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class GridMismatchError(ValueError):
    """Raised when two grid functions are combined across different grids."""


@dataclass(frozen=True)
class Grid:
    """Uniform partition ``t_i = i*h`` of [0, 1] with ``n`` nodes."""

    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise TypeError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 3:
            raise ValueError(f"grid needs at least 3 nodes, got n={self.n}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        # i/(n-1) rather than i*h keeps both endpoints exact
        t = np.arange(self.n, dtype=float) / (self.n - 1)
        t.flags.writeable = False
        return t


def make_grid(n: int) -> Grid:
    return Grid(int(n) if isinstance(n, np.integer) else n)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real samples ``values[i]`` of a function at the nodes of ``grid``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise ValueError(
                f"expected {self.grid.n} values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValueError(f"non-finite value at node {bad} (t={bad * self.grid.h})")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    def __len__(self) -> int:
        return self.grid.n

    def __getitem__(self, i):
        return self.values[i]

    def _check(self, other: GridFunction) -> None:
        if self.grid != other.grid:
            raise GridMismatchError(
                f"grid mismatch: n={self.grid.n} vs n={other.grid.n}"
            )

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, GridFunction):
            self._check(other)
            return other.values
        return np.asarray(other, dtype=float)

    def __add__(self, other) -> GridFunction:
        return GridFunction(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> GridFunction:
        return GridFunction(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other) -> GridFunction:
        return GridFunction(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other) -> GridFunction:
        return GridFunction(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self) -> GridFunction:
        return GridFunction(self.grid, -self.values)

    def equals(self, other: GridFunction) -> bool:
        """Bit-exact equality of grid and values."""
        return self.grid == other.grid and np.array_equal(self.values, other.values)


def sample(f: Callable[[np.ndarray], np.ndarray] | Callable[[float], float], g: Grid) -> GridFunction:
    """Evaluate ``f`` at every node of ``g``.

    ``f`` may be vectorized (accepting the node array) or scalar; scalar
    callables are evaluated node by node.
    """
    t = g.nodes
    try:
        values = np.asarray(f(t), dtype=float)
        if values.shape == ():
            values = np.full(g.n, float(values))
    except TypeError:
        values = np.array([f(float(ti)) for ti in t], dtype=float)
    if values.shape != (g.n,):
        values = np.array([f(float(ti)) for ti in t], dtype=float)
    return GridFunction(g, values)


def zeros(g: Grid) -> GridFunction:
    return GridFunction(g, np.zeros(g.n))


def sup_norm(v: GridFunction) -> float:
    return float(np.max(np.abs(v.values)))


def axpy(a: float, x: GridFunction, y: GridFunction) -> GridFunction:
    """Return ``a*x + y``."""
    x._check(y)
    return GridFunction(x.grid, a * x.values + y.values)


def pointwise_max(x: GridFunction, y: GridFunction) -> GridFunction:
    x._check(y)
    return GridFunction(x.grid, np.maximum(x.values, y.values))


def pointwise_min(x: GridFunction, y: GridFunction) -> GridFunction:
    x._check(y)
    return GridFunction(x.grid, np.minimum(x.values, y.values))


def clamp(v: GridFunction, lower: GridFunction, upper: GridFunction) -> GridFunction:
    """``min(upper, max(v, lower))`` pointwise."""
    return pointwise_min(upper, pointwise_max(v, lower))
