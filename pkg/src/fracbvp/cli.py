"""Command-line interface: ``fracbvp {solve,check,op,mono,study}``.

Reports are written to stdout as ``# key = value`` lines; CSV data goes to
``--output`` (``-`` for stdout, after the report). Exit codes: 0 success,
1 usage or configuration error, 2 non-convergence, 3 hypothesis failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from contextlib import contextmanager
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import expr
from .fracops import (
    left_rl_derivative,
    left_rl_integral,
    right_caputo_derivative,
    right_rl_integral,
)
from .grid import make_grid, sample
from .solver import (
    ProblemSpec,
    build_bracket,
    check_hypotheses,
    monotonicity_check,
    residual,
    solve,
)
from .validate import example_solution, run_convergence

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED, EXIT_HYPOTHESIS = 0, 1, 2, 3

REQUIRED = ("omega", "p", "q", "f")
DEFAULTS = {
    "A": 0.0,
    "B": 0.0,
    "n": 1025,
    "tol": 1e-10,
    "max_iter": 200,
    "damping": 0.5,
    "r_samples": None,
    "output": None,
}
KEYS = REQUIRED + tuple(DEFAULTS)
EXAMPLE = {"omega": 1.0, "p": 0.5, "q": 0.5, "f": "x - 0.01*(1-t)^0.5", "A": 0.01, "B": -0.01}


class ConfigError(Exception):
    pass


def _number(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        node = expr.parse(text)
        if not expr.is_constant(node):
            raise ConfigError(f"expected a number, got {text!r}") from None
        return expr.evaluate(node, 0.0)


def _convert(key: str, text: str):
    text = text.strip()
    if key == "f":
        expr.parse(text)
        return text
    if key == "output":
        return text
    if key in ("n", "max_iter"):
        value = _number(text)
        if value != int(value):
            raise ConfigError(f"{key} must be an integer, got {text!r}")
        return int(value)
    if key == "r_samples":
        return tuple(_number(part) for part in text.split(",") if part.strip())
    return _number(text)


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _convert(key, value)
        except (expr.ExprError, ConfigError) as err:
            raise ConfigError(f"{source}:{lineno}: {key}: {err}") from None
    return values


def resolve(values: dict) -> dict:
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError("missing required key(s): " + ", ".join(missing))
    return {**DEFAULTS, **values}


def make_spec(cfg: dict) -> ProblemSpec:
    try:
        return ProblemSpec(
            omega=cfg["omega"],
            p=cfg["p"],
            q=cfg["q"],
            f=cfg["f"],
            A=cfg["A"],
            B=cfg["B"],
            n=cfg["n"],
            tol=cfg["tol"],
            max_iter=cfg["max_iter"],
            damping=cfg["damping"],
            r_samples=cfg["r_samples"] or (),
        )
    except (ValueError, TypeError) as err:
        raise ConfigError(str(err)) from None


def fmt(x: float) -> str:
    return "%.17g" % x


def _text(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_text(v) for v in value)
    return str(value)


def write_csv(out: TextIO, header: Sequence[str], columns: Iterable[Sequence[float]]) -> None:
    out.write(",".join(header) + "\n")
    for row in zip(*columns):
        out.write(",".join(fmt(v) for v in row) + "\n")


@contextmanager
def _open_output(path: str | None, stdout: TextIO):
    if path in (None, "-"):
        yield stdout
    else:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            yield fh


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _add_problem_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", metavar="PATH", help="key = value problem file")
    sp.add_argument("--example", action="store_true", help="load the built-in example problem")
    for key in KEYS:
        flag = "--" + key.replace("_", "-")
        sp.add_argument(flag, dest="cfg_" + key, metavar=key.upper(), default=None)


def _load_problem(args) -> dict:
    values: dict = dict(EXAMPLE) if args.example else {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as err:
            raise ConfigError(f"cannot read config: {err}") from None
        values.update(parse_config(text, args.config))
    for key in KEYS:
        raw = getattr(args, "cfg_" + key)
        if raw is not None:
            try:
                values[key] = _convert(key, raw)
            except (expr.ExprError, ConfigError) as err:
                raise ConfigError(f"--{key.replace('_', '-')}: {err}") from None
    return resolve(values)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracbvp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("solve", help="solve the boundary value problem")
    _add_problem_args(sp)

    sp = sub.add_parser("check", help="verify the bracket hypotheses")
    _add_problem_args(sp)

    sp = sub.add_parser("op", help="apply one fractional operator")
    sp.add_argument("--op", required=True, choices=["ilq", "irq", "dlq", "dcr"])
    sp.add_argument("--mu", required=True, type=float)
    sp.add_argument("--f", required=True, dest="expr")
    sp.add_argument("--n", type=int, default=1025)
    sp.add_argument("--output", default="-")

    sp = sub.add_parser("mono", help="monotonicity from right Caputo derivative signs")
    sp.add_argument("--f", required=True, dest="expr")
    sp.add_argument("--orders", default="0.6,0.8,0.95")
    sp.add_argument("--n", type=int, default=1025)

    sp = sub.add_parser("study", help="grid-refinement study against an exact solution")
    _add_problem_args(sp)
    sp.add_argument("--sizes", default="257,513,1025,2049")
    sp.add_argument("--exact", default=None, help="exact u(t); implied by --example")
    return parser


def _echo(out: TextIO, cfg: dict) -> None:
    for key in KEYS:
        value = cfg[key]
        out.write(f"# {key} = {'' if value is None else _text(value)}\n")


def _hypothesis_lines(out: TextIO, hyp) -> None:
    name, t, x, r = hyp.where
    out.write(f"# hypotheses = {'pass' if hyp.passed else 'fail'}\n")
    out.write(f"# margin = {fmt(hyp.margin)} ({name} at t={fmt(t)}, x={fmt(x)}, r={fmt(r)})\n")
    out.write(f"# h1_margin = {fmt(hyp.h1_margin)}\n")
    out.write(f"# h2_margin = {fmt(hyp.h2_margin)}\n")
    out.write(f"# a_dominates_b = {str(hyp.a_dominates_b).lower()}\n")


def cmd_solve(args, out: TextIO) -> int:
    cfg = _load_problem(args)
    spec = make_spec(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        u, v, report = solve(spec)
    defect, _ = residual(u, spec)
    b = build_bracket(spec)
    _echo(out, {**cfg, "r_samples": spec.r_samples})
    out.write(f"# iterations = {report.iterations}\n")
    out.write(f"# converged = {str(report.converged).lower()}\n")
    out.write(f"# final_step = {fmt(report.residual_history[-1])}\n")
    out.write(f"# M = {fmt(report.M)}\n")
    out.write(f"# bracket_ok = {str(report.bracket_ok).lower()}\n")
    out.write(f"# bc_u0 = {fmt(report.bc_residuals[0])}\n")
    out.write(f"# bc_dqu1 = {fmt(report.bc_residuals[1])}\n")
    out.write(f"# ode_residual = {fmt(report.ode_residual)}\n")
    _hypothesis_lines(out, report.hypotheses)
    for msg in report.warnings:
        out.write(f"# warning = {msg}\n")
    if cfg["output"] is not None:
        with _open_output(cfg["output"], out) as fh:
            write_csv(
                fh,
                ["t", "u", "v", "alpha", "beta", "defect"],
                [u.t, u.values, v.values, b.alpha.values, b.beta.values, defect.values],
            )
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def cmd_check(args, out: TextIO) -> int:
    cfg = _load_problem(args)
    spec = make_spec(cfg)
    hyp = check_hypotheses(spec)
    _echo(out, {**cfg, "r_samples": spec.r_samples})
    _hypothesis_lines(out, hyp)
    return EXIT_OK if hyp.passed else EXIT_HYPOTHESIS


OPERATORS = {
    "ilq": left_rl_integral,
    "irq": right_rl_integral,
    "dlq": left_rl_derivative,
    "dcr": right_caputo_derivative,
}


def _sample_expr(text: str, n: int):
    try:
        node = expr.parse(text)
        grid = make_grid(n)
        return sample(lambda t: expr.evaluate(node, t, 0.0), grid)
    except (expr.ExprError, ValueError, TypeError) as err:
        raise ConfigError(f"--f: {err}") from None


def cmd_op(args, out: TextIO) -> int:
    g = _sample_expr(args.expr, args.n)
    try:
        result = OPERATORS[args.op](g, args.mu)
    except ValueError as err:
        raise ConfigError(str(err)) from None
    values = np.array(result.values)
    out.write(f"# op = {args.op}\n# mu = {_text(float(args.mu))}\n# f = {args.expr}\n# n = {args.n}\n")
    if getattr(result, "singular_at_zero", False):
        values[0] = math.nan
        out.write("# warning = f(0) != 0, derivative is singular at t=0\n")
    with _open_output(args.output, out) as fh:
        write_csv(fh, ["t", "value"], [g.t, values])
    return EXIT_OK


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def cmd_mono(args, out: TextIO) -> int:
    g = _sample_expr(args.expr, args.n)
    orders = _floats(args.orders, "--orders")
    try:
        verdict = monotonicity_check(g, orders)
    except ValueError as err:
        raise ConfigError(str(err)) from None
    out.write(f"# f = {args.expr}\n# orders = {_text(tuple(orders))}\n# n = {args.n}\n")
    out.write(verdict + "\n")
    return EXIT_OK


def cmd_study(args, out: TextIO) -> int:
    cfg = _load_problem(args)
    spec = make_spec(cfg)
    sizes = [int(s) for s in _floats(args.sizes, "--sizes")]
    if args.exact is not None:
        node = _parse_flag(args.exact, "--exact")
        oracle = lambda t: expr.evaluate(node, t, 0.0)  # noqa: E731
    elif args.example:
        oracle = example_solution
    else:
        raise ConfigError("study needs --exact EXPR unless --example is given")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            study = run_convergence(spec, oracle, sizes)
    except ValueError as err:
        raise ConfigError(str(err)) from None
    _echo(out, {**cfg, "r_samples": spec.r_samples})
    out.write(f"# sizes = {','.join(map(str, sizes))}\n")
    out.write(f"# complete = {str(study.complete).lower()}\n")
    rows = list(study.rows())
    with _open_output(cfg["output"] or "-", out) as fh:
        write_csv(fh, ["n", "h", "error", "order"], list(zip(*rows)))
    return EXIT_OK if study.complete else EXIT_NONCONVERGED


def _parse_flag(text: str, flag: str):
    try:
        return expr.parse(text)
    except expr.ExprError as err:
        raise ConfigError(f"{flag}: {err}") from None


COMMANDS = {"solve": cmd_solve, "check": cmd_check, "op": cmd_op, "mono": cmd_mono, "study": cmd_study}


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None) -> int:
    out = stdout if stdout is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except ConfigError as err:
        sys.stderr.write(f"fracbvp: error: {err}\n")
        return EXIT_USAGE
    except expr.EvalError as err:
        sys.stderr.write(f"fracbvp: error: {err}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
