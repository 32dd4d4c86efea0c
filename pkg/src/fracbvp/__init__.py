"""Fractional oscillator boundary value problems with lower/upper solution brackets."""

from .expr import EvalError, ExprSyntaxError, evaluate, parse, to_text
from .fracops import (
    FracOrder,
    caputo_limit_probe,
    left_rl_derivative,
    left_rl_integral,
    right_caputo_derivative,
    right_rl_integral,
)
from .grid import Grid, GridFunction, axpy, clamp, make_grid, sample, sup_norm
from .solver import (
    BracketPair,
    ProblemSpec,
    SolveReport,
    apply_R,
    apply_T,
    build_bracket,
    check_hypotheses,
    clamp_F,
    monotonicity_check,
    residual,
    solve,
    verify_bracket,
)

__version__ = "0.1.0"
