r"""Lower/upper-solution machinery and the fixed-point solve.

The problem is

.. math::

    \omega^2 u - {}^C D_{1^-}^p D_{0^+}^q u = f(t, u), \qquad
    u(0) = 0, \quad D_{0^+}^q u(1) = 0.

Writing ``u = T v`` with ``T = I_{0+}^q`` turns it into a Caputo problem of
order ``p`` for ``v = D_{0+}^q u`` with ``v(1) = 0``, which is solved by
damped Picard iteration on ``R v = -I_{1-}^p F v``, where ``F`` is the
nonlinearity evaluated on the clamped iterate ``min(phi, max(v, psi))``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import expr
from .fracops import (
    FracOrder,
    as_order,
    left_rl_derivative,
    left_rl_integral,
    right_caputo_derivative,
    right_rl_integral,
)
from .grid import Grid, GridFunction, clamp, make_grid, sample, sup_norm

log = logging.getLogger(__name__)

X_SAMPLES = 64
BRACKET_SLACK = 1e-9


class HypothesisWarning(UserWarning):
    """Solving a problem whose bracket hypotheses failed to verify."""


def default_r_samples(p: float) -> tuple[float, ...]:
    candidates = {p, (1 + p) / 2, (3 + p) / 4, 0.95, 0.99}
    return tuple(sorted(r for r in candidates if p <= r < 1))


@dataclass(frozen=True)
class ProblemSpec:
    omega: float
    p: FracOrder
    q: FracOrder
    f: expr.Expression
    A: float = 0.0
    B: float = 0.0
    n: int = 1025
    tol: float = 1e-10
    max_iter: int = 200
    damping: float = 0.5
    r_samples: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("p", as_order(self.p))
        set_("q", as_order(self.q))
        if isinstance(self.f, str):
            set_("f", expr.parse(self.f))
        set_("omega", float(self.omega))
        set_("A", float(self.A))
        set_("B", float(self.B))
        if self.omega == 0 or not math.isfinite(self.omega):
            raise ValueError(f"omega must be finite and nonzero, got {self.omega}")
        if not (self.A >= 0 >= self.B):
            raise ValueError(f"need A >= 0 >= B, got A={self.A}, B={self.B}")
        make_grid(self.n)
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if not (0 < self.damping <= 1):
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")
        p = self.p.mu
        rs = tuple(float(r) for r in self.r_samples) or default_r_samples(p)
        if list(rs) != sorted(rs) or any(not (p <= r < 1) for r in rs):
            raise ValueError(f"r_samples must be sorted and lie in [p, 1), got {rs}")
        set_("r_samples", rs)

    @property
    def grid(self) -> Grid:
        return make_grid(self.n)

    def margin_function(self, t, x):
        """``omega**2 * x - f(t, x)``, the quantity the hypotheses bound."""
        return self.omega**2 * np.asarray(x) - expr.evaluate(self.f, t, x)


@dataclass(frozen=True)
class BracketPair:
    phi: GridFunction
    psi: GridFunction
    alpha: GridFunction  # lower solution, T phi
    beta: GridFunction  # upper solution, T psi


@dataclass(frozen=True)
class HypothesisReport:
    passed: bool
    margin: float
    where: tuple[str, float, float, float]  # (hypothesis, t, x, r) of the minimum
    h1_margin: float
    h2_margin: float
    bounds_hold: bool = True
    a_dominates_b: bool = True  # A >= |B|, part of the second hypothesis


@dataclass
class SolveReport:
    iterations: int
    residual_history: list[float]
    converged: bool
    M: float
    bracket_ok: bool
    bc_residuals: tuple[float, float]
    ode_residual: float
    hypotheses: HypothesisReport | None = None
    warnings: list[str] = field(default_factory=list)


def apply_T(v: GridFunction, q: FracOrder | float) -> GridFunction:
    """``u = I_{0+}^q v``; ``u(0) = 0`` exactly."""
    return left_rl_integral(v, q)


def build_bracket(spec: ProblemSpec) -> BracketPair:
    """``phi = A(1-t)``, ``psi = B(1-t)`` and their images under ``T``."""
    g = spec.grid
    # + 0.0 normalizes the -0.0 that B*(1-1) produces
    phi = sample(lambda t: spec.A * (1.0 - t) + 0.0, g)
    psi = sample(lambda t: spec.B * (1.0 - t) + 0.0, g)
    alpha = apply_T(phi, spec.q)
    beta = apply_T(psi, spec.q)
    b = BracketPair(phi, psi, alpha, beta)

    cap = spec.A / math.gamma(spec.q.mu + 1)
    slack = 1e-12 * (1.0 + spec.A)
    problems = []
    if np.any(beta.values > alpha.values):
        problems.append("beta > alpha")
    if np.any(psi.values > phi.values):
        problems.append("psi > phi")
    if alpha[0] != 0 or beta[0] != 0 or phi[-1] != 0 or psi[-1] != 0:
        problems.append("endpoint values")
    if np.any(alpha.values < -slack) or np.any(alpha.values > cap + slack):
        problems.append("T phi outside [0, A/Gamma(q+1)]")
    if problems:
        raise ArithmeticError("bracket invariants violated: " + ", ".join(problems))
    return b


def check_hypotheses(spec: ProblemSpec, atol: float = 1e-12) -> HypothesisReport:
    """Sample the two one-sided bounds on ``omega**2 x - f(t, x)``.

    The first is checked for ``0 <= x <= A/Gamma(q+1)`` against
    ``A (1-t)**(1-r)``, the second for ``B/Gamma(q+1) <= x <= 0`` against
    ``B (1-t)**(1-r)``; ``t`` runs over the grid and ``r`` over
    ``spec.r_samples``. Margins are positive when a bound holds.
    """
    t = spec.grid.nodes
    g1 = math.gamma(spec.q.mu + 1)
    r = np.asarray(spec.r_samples)
    T, R = np.meshgrid(t, r, indexing="ij")
    weight = (1.0 - T) ** (1.0 - R)

    results = {}
    for name, x_end, const, sign in (
        ("H1", spec.A / g1, spec.A, 1.0),
        ("H2", spec.B / g1, spec.B, -1.0),
    ):
        xs = np.linspace(0.0, x_end, X_SAMPLES)
        lhs = spec.margin_function(t[:, None], xs[None, :])  # (n, nx)
        # H1: A w - lhs >= 0 ; H2: lhs - B w >= 0
        margin = sign * (const * weight[:, None, :] - lhs[:, :, None])
        k = int(np.argmin(margin))
        i, j, m = np.unravel_index(k, margin.shape)
        results[name] = (float(margin[i, j, m]), (name, float(t[i]), float(xs[j]), float(r[m])))

    worst = min(results.values(), key=lambda item: item[0])
    dominates = spec.A >= abs(spec.B)
    bounds = worst[0] >= -atol
    return HypothesisReport(
        passed=bounds and dominates,
        margin=worst[0],
        where=worst[1],
        h1_margin=results["H1"][0],
        h2_margin=results["H2"][0],
        bounds_hold=bounds,
        a_dominates_b=dominates,
    )


def nonlinearity_bound(spec: ProblemSpec, b: BracketPair) -> float:
    """``M = max |omega**2 x - f(t, x)|`` over ``beta(t) <= x <= alpha(t)``."""
    s = np.linspace(0.0, 1.0, X_SAMPLES)
    x = b.beta.values[:, None] + s[None, :] * (b.alpha.values - b.beta.values)[:, None]
    t = b.alpha.t[:, None]
    return float(np.max(np.abs(spec.margin_function(t, x))))


def clamp_F(v: GridFunction, spec: ProblemSpec, b: BracketPair) -> GridFunction:
    """``-omega**2 T w + f(t, T w)`` with ``w = min(phi, max(v, psi))``."""
    uw = apply_T(clamp(v, b.psi, b.phi), spec.q)
    values = expr.evaluate(spec.f, uw.t, uw.values) - spec.omega**2 * uw.values
    return GridFunction(v.grid, values)


def apply_R(v: GridFunction, spec: ProblemSpec, b: BracketPair) -> GridFunction:
    """``R v = -I_{1-}^p F v``, which vanishes at ``t = 1`` exactly.

    A fixed point satisfies ``-C^D_{1-}^p v = F v`` with ``v(1) = 0``.
    """
    return right_rl_integral(-clamp_F(v, spec, b), spec.p)


def verify_bracket(
    u: GridFunction, v: GridFunction, b: BracketPair, slack: float = BRACKET_SLACK
) -> bool:
    """Check ``beta <= u <= alpha`` and ``psi <= v <= phi`` up to ``slack``."""
    ok_u = np.all(b.beta.values - slack <= u.values) and np.all(u.values <= b.alpha.values + slack)
    ok_v = np.all(b.psi.values - slack <= v.values) and np.all(v.values <= b.phi.values + slack)
    return bool(ok_u and ok_v)


def residual(u: GridFunction, spec: ProblemSpec) -> tuple[GridFunction, tuple[float, float]]:
    """Defect of the original equation at interior nodes plus both boundary residuals.

    Endpoint entries of the defect are 0. ``u(0)`` should vanish, otherwise
    the ``t**-q`` term of the left derivative dominates.
    """
    dq = left_rl_derivative(u, spec.q)
    lhs = spec.omega**2 * u.values - right_caputo_derivative(dq, spec.p).values
    defect = np.zeros(u.grid.n)
    t = u.t[1:-1]
    defect[1:-1] = lhs[1:-1] - expr.evaluate(spec.f, t, u.values[1:-1])
    return GridFunction(u.grid, defect), (abs(float(u[0])), abs(float(dq[-1])))


def solve(spec: ProblemSpec) -> tuple[GridFunction, GridFunction, SolveReport]:
    """Damped Picard iteration ``v <- (1-lam) v + lam R v`` from ``(phi+psi)/2``.

    Non-convergence is reported, not raised.
    """
    hyp = check_hypotheses(spec)
    notes = []
    if not hyp.a_dominates_b:
        msg = f"A={spec.A} < |B|={abs(spec.B)}; existence inside the bracket is not guaranteed"
        warnings.warn(msg, HypothesisWarning, stacklevel=2)
        notes.append(msg)
    if not hyp.bounds_hold:
        msg = (
            f"hypothesis {hyp.where[0]} fails (margin {hyp.margin:.3e} at "
            f"t={hyp.where[1]:.6g}, x={hyp.where[2]:.6g}, r={hyp.where[3]:.6g}); "
            "existence inside the bracket is not guaranteed"
        )
        warnings.warn(msg, HypothesisWarning, stacklevel=2)
        notes.append(msg)

    b = build_bracket(spec)
    lam = spec.damping
    v = (b.phi + b.psi) * 0.5
    history: list[float] = []
    converged = False
    for k in range(1, int(spec.max_iter) + 1):
        v_next = GridFunction(v.grid, (1.0 - lam) * v.values + lam * apply_R(v, spec, b).values)
        step = sup_norm(v_next - v)
        history.append(step)
        v = v_next
        log.debug("iteration %d: step %.3e", k, step)
        if step <= spec.tol:
            converged = True
            break

    u = apply_T(v, spec.q)
    defect, bc = residual(u, spec)
    report = SolveReport(
        iterations=len(history),
        residual_history=history,
        converged=converged,
        M=nonlinearity_bound(spec, b),
        bracket_ok=verify_bracket(u, v, b),
        bc_residuals=bc,
        ode_residual=sup_norm(defect),
        hypotheses=hyp,
        warnings=notes,
    )
    return u, v, report


def monotonicity_check(
    g: GridFunction, orders: Sequence[FracOrder | float], eta: float | None = None
) -> str:
    """Infer monotonicity from the sign of the right Caputo derivative.

    Returns ``"decreasing"`` if the derivative is ``>= -eta`` at all interior
    nodes for every order and the samples are non-increasing up to ``eta``,
    ``"increasing"`` for the mirrored conditions, else ``"inconclusive"``.
    A constant passes both tests and reports ``"decreasing"``.
    """
    if eta is None:
        eta = 1e-8 * (1.0 + sup_norm(g))
    derivs = [right_caputo_derivative(g, r).values[1:-1] for r in orders]
    steps = np.diff(g.values)
    if all(np.all(d >= -eta) for d in derivs) and np.all(steps <= eta):
        return "decreasing"
    if all(np.all(d <= eta) for d in derivs) and np.all(steps >= -eta):
        return "increasing"
    return "inconclusive"
