"""Analytic oracles and grid-refinement studies.

Nothing in :mod:`fracbvp.fracops` or :mod:`fracbvp.solver` imports this
module; it exists to check them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .fracops import FracOrder, as_order
from .solver import ProblemSpec, solve

GAMMA_5_2 = 0.75 * math.sqrt(math.pi)


class AccuracyWarning(UserWarning):
    """The reference quadrature did not reach its accuracy target."""


def example_problem(n: int = 1025, **overrides) -> ProblemSpec:
    """omega = 1, p = q = 1/2, f = x - (1-t)^(1/2)/100, A = -B = 1/100."""
    params = dict(
        omega=1.0, p=0.5, q=0.5, f="x - 0.01*(1-t)^0.5", A=0.01, B=-0.01, n=n
    )
    params.update(overrides)
    return ProblemSpec(**params)


def example_solution(t):
    t = np.asarray(t, dtype=float)
    return np.sqrt(t) / 100.0 * (1.0 - 2.0 * t / 3.0)


def example_alpha(t):
    t = np.asarray(t, dtype=float)
    return np.sqrt(t) * (1.5 - t) / (100.0 * GAMMA_5_2)


def example_beta(t):
    return -example_alpha(t)


def power_law_integral(t, nu: float, mu: float):
    """Closed form of ``I_{0+}^mu t**nu``."""
    t = np.asarray(t, dtype=float)
    return math.gamma(nu + 1) / math.gamma(nu + mu + 1) * t ** (nu + mu)


def reference_frac_integral(
    f: Callable[[float], float],
    mu: FracOrder | float,
    side: str,
    t: float,
    rtol: float = 1e-9,
) -> float:
    """Fractional integral of ``f`` at ``t`` by adaptive quadrature.

    The substitution ``|s - t| = w**(1/mu)`` removes the kernel singularity:
    ``I^mu f(t) = 1/Gamma(mu+1) * int_0^L f(t -/+ w**(1/mu)) dw`` with
    ``L = t**mu`` (left) or ``(1-t)**mu`` (right).
    """
    mu = as_order(mu).mu
    if side == "left":
        upper, point = t**mu, lambda w: t - w ** (1.0 / mu)
    elif side == "right":
        upper, point = (1.0 - t) ** mu, lambda w: t + w ** (1.0 / mu)
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if upper == 0.0:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.quad(
            lambda w: f(point(w)), 0.0, upper, epsabs=1e-15, epsrel=1e-13, limit=200
        )
    value /= math.gamma(mu + 1)
    err /= math.gamma(mu + 1)
    if err > rtol * max(abs(value), 1e-300) and err > 1e-15:
        warnings.warn(
            f"reference integral at t={t} has error estimate {err:.2e}",
            AccuracyWarning,
            stacklevel=2,
        )
    return value


@dataclass
class ConvergenceStudy:
    sizes: list[int]
    errors: list[float]
    orders: list[float]  # one per consecutive pair; nan when an error is 0
    complete: bool = True

    def rows(self):
        for k, (n, e) in enumerate(zip(self.sizes, self.errors)):
            yield n, 1.0 / (n - 1), e, (self.orders[k - 1] if k else math.nan)


def empirical_orders(sizes: Sequence[int], errors: Sequence[float]) -> list[float]:
    out = []
    for (n0, e0), (n1, e1) in zip(zip(sizes, errors), zip(sizes[1:], errors[1:])):
        if e0 > 0 and e1 > 0:
            out.append(math.log(e0 / e1) / math.log((n1 - 1) / (n0 - 1)))
        else:
            out.append(math.nan)
    return out


def run_convergence(
    problem: ProblemSpec, oracle: Callable, sizes: Sequence[int]
) -> ConvergenceStudy:
    """Solve at each size and measure the sup error of ``u`` against ``oracle``."""
    sizes = [int(n) for n in sizes]
    if len(sizes) < 3:
        raise ValueError("a convergence study needs at least 3 sizes")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"sizes must increase, got {sizes}")
    for a, b in zip(sizes, sizes[1:]):
        if (b - 1) % (a - 1):
            raise ValueError(f"grids {a} and {b} are not nested")
    errors = []
    complete = True
    for n in sizes:
        u, _, report = solve(replace(problem, n=n))
        complete &= report.converged
        exact = np.asarray(oracle(u.t), dtype=float)
        errors.append(float(np.max(np.abs(u.values - exact))))
    return ConvergenceStudy(sizes, errors, empirical_orders(sizes, errors), complete)
