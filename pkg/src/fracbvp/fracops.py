r"""Discrete left/right Riemann-Liouville integrals and fractional derivatives.

All operators work on uniform grids over [0, 1]:

* integrals use product integration, i.e. the data is replaced by its
  piecewise-linear interpolant and the kernel :math:`(t-s)^{\mu-1}` is
  integrated exactly against it;
* derivatives use the L1 scheme, i.e. per-cell difference quotients paired
  with exact integration of the kernel :math:`(t-s)^{-\mu}` over each cell.

The weights depend only on the index distance, so each operator is a
direct (non-FFT) discrete convolution plus an endpoint correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grid import GridFunction


@dataclass(frozen=True)
class FracOrder:
    """Fractional order ``0 < mu < 1``."""

    mu: float

    def __post_init__(self) -> None:
        mu = float(self.mu)
        if not (0.0 < mu < 1.0):
            raise ValueError(f"fractional order must lie in (0, 1), got {self.mu}")
        object.__setattr__(self, "mu", mu)

    def __float__(self) -> float:
        return self.mu


def as_order(mu: FracOrder | float) -> FracOrder:
    return mu if isinstance(mu, FracOrder) else FracOrder(mu)


@dataclass(frozen=True, eq=False)
class LeftDerivative(GridFunction):
    """Result of :func:`left_rl_derivative`.

    When the input does not vanish at ``t = 0`` the exact derivative blows up
    like ``t**-mu`` there; ``singular_at_zero`` is then set and ``values[0]``
    holds a placeholder 0.0 that must not be used.
    """

    singular_at_zero: bool = False


def _product_weights(n: int, mu: float) -> tuple[np.ndarray, np.ndarray]:
    """Convolution and first-node weights of piecewise-linear product integration.

    Node ``i`` of the left integral is
    ``h**mu/Gamma(mu+2) * (a0[i]*g[0] + sum_{k=0}^{i-1} c[k]*g[i-k])``.
    """
    k = np.arange(1, n, dtype=float)
    c = np.empty(n)
    c[0] = 1.0
    c[1:] = (k + 1.0) ** (mu + 1) + (k - 1.0) ** (mu + 1) - 2.0 * k ** (mu + 1)
    a0 = np.zeros(n)
    a0[1:] = (k - 1.0) ** (mu + 1) - (k - 1.0 - mu) * k**mu
    return c, a0


def _l1_weights(m: int, mu: float) -> np.ndarray:
    k = np.arange(m, dtype=float)
    return (k + 1.0) ** (1 - mu) - k ** (1 - mu)


def _left_integral(values: np.ndarray, mu: float, h: float) -> np.ndarray:
    n = values.size
    c, a0 = _product_weights(n, mu)
    # c[i] multiplies g[0] in the raw convolution; swap it for a0[i]
    raw = np.convolve(values, c)[:n]
    raw[1:] += (a0[1:] - c[1:]) * values[0]
    out = raw * (h**mu / math.gamma(mu + 2))
    out[0] = 0.0
    return out


def left_rl_integral(g: GridFunction, mu: FracOrder | float) -> GridFunction:
    r"""Left integral :math:`I_{0^+}^\mu g`, exact for piecewise-linear ``g``."""
    mu = as_order(mu).mu
    return GridFunction(g.grid, _left_integral(g.values, mu, g.grid.h))


def right_rl_integral(g: GridFunction, mu: FracOrder | float) -> GridFunction:
    r"""Right integral :math:`I_{1^-}^\mu g`.

    Computed as the left integral of the reflected data, so
    ``right(g)(t) == left(g(1 - .))(1 - t)`` holds bit for bit.
    """
    mu = as_order(mu).mu
    out = _left_integral(g.values[::-1].copy(), mu, g.grid.h)[::-1]
    return GridFunction(g.grid, out)


def right_caputo_derivative(g: GridFunction, mu: FracOrder | float) -> GridFunction:
    r"""Right Caputo derivative :math:`-I_{1^-}^{1-\mu} g'` by the L1 scheme.

    Node ``i`` is ``-h**-mu/Gamma(2-mu) * sum_{j>=i} b[j-i]*(g[j+1]-g[j])``;
    the last node is 0.
    """
    mu = as_order(mu).mu
    n, h = g.grid.n, g.grid.h
    d = np.diff(g.values)[::-1]
    s = np.convolve(d, _l1_weights(n - 1, mu))[: n - 1][::-1]
    out = np.zeros(n)
    out[:-1] = -s * (h**-mu / math.gamma(2 - mu))
    return GridFunction(g.grid, out)


def left_caputo_derivative(g: GridFunction, mu: FracOrder | float) -> GridFunction:
    """Left Caputo derivative by the L1 scheme; the first node is 0."""
    mu = as_order(mu).mu
    n, h = g.grid.n, g.grid.h
    s = np.convolve(np.diff(g.values), _l1_weights(n - 1, mu))[: n - 1]
    out = np.zeros(n)
    out[1:] = s * (h**-mu / math.gamma(2 - mu))
    return GridFunction(g.grid, out)


def left_rl_derivative(g: GridFunction, mu: FracOrder | float) -> LeftDerivative:
    r"""Left Riemann-Liouville derivative :math:`\frac{d}{dt} I_{0^+}^{1-\mu} g`.

    Uses ``D^mu g = C^D^mu g + g(0) t**-mu / Gamma(1-mu)``. Only the first
    term is discretized; accurate when ``g(0) = 0``.
    """
    mu = as_order(mu).mu
    out = left_caputo_derivative(g, mu).values.copy()
    g0 = float(g.values[0])
    if g0 != 0.0:
        t = g.grid.nodes[1:]
        out[1:] += g0 * t**-mu / math.gamma(1 - mu)
        out[0] = 0.0
    return LeftDerivative(g.grid, out, singular_at_zero=g0 != 0.0)


def caputo_limit_probe(
    g: GridFunction,
    dg: GridFunction,
    orders: Sequence[FracOrder | float],
) -> list[tuple[float, float]]:
    """Interior sup distance between the right Caputo derivative and ``-g'``.

    ``dg`` holds the sampled first derivative of ``g``. Returns one
    ``(order, distance)`` pair per order, in the order given; the orders
    must increase strictly toward 1.
    """
    mus = [as_order(r).mu for r in orders]
    if any(b <= a for a, b in zip(mus, mus[1:])):
        raise ValueError(f"orders must be strictly increasing, got {mus}")
    g._check(dg)
    table = []
    for r in mus:
        diff = right_caputo_derivative(g, r).values + dg.values
        table.append((r, float(np.max(np.abs(diff[1:-1])))))
    return table
