"""Arithmetic expressions in the two variables ``t`` and ``x``.

Grammar, loosest binding first::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := NUMBER | 't' | 'x' | 'pi' | NAME '(' args ')' | '(' expr ')'

``eval`` accepts scalars or numpy arrays for ``t`` and ``x`` and raises
:class:`EvalError` instead of ever returning NaN or infinity.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Num", "Var", "Neg", "BinOp", "Call", "Expression",
    "ExprError", "ExprSyntaxError", "EvalError",
    "parse", "to_text", "evaluate", "is_constant",
]


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    """Malformed expression text; ``column`` is 1-based."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} at column {column}")
        self.column = column


class EvalError(ExprError):
    """Domain error; ``subexpr`` is the canonical text of the offending node."""

    def __init__(self, message: str, subexpr: str):
        super().__init__(f"{message} in '{subexpr}'")
        self.subexpr = subexpr


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: Expression


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expression = Union[Num, Var, Neg, BinOp, Call]

FUNCTIONS = {"sqrt": 1, "exp": 1, "sin": 1, "cos": 1, "abs": 1, "pow": 2}
VARIABLES = ("t", "x")
CONSTANTS = {"pi": math.pi}

_TOKEN = re.compile(
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),])"
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos == len(src):
            break
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos + 1)
        tokens.append((m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    tokens.append(("end", "", len(src) + 1))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, value, col = self.tok
        if value != text or kind != "op":
            found = "end of input" if kind == "end" else repr(value)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", col)
        return self.advance()

    def parse(self) -> Expression:
        node = self.expr()
        kind, value, col = self.tok
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {value!r}", col)
        return node

    def expr(self) -> Expression:
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expression:
        if self.tok[:2] == ("op", "-"):
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.tok[:2] == ("op", "^"):
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        kind, value, col = self.tok
        if kind == "num":
            self.advance()
            return Num(float(value))
        if kind == "name":
            self.advance()
            if self.tok[:2] == ("op", "("):
                return self.call(value, col)
            if value in VARIABLES:
                return Var(value)
            if value in CONSTANTS:
                return Var(value)
            raise ExprSyntaxError(f"unknown identifier {value!r}", col)
        if (kind, value) == ("op", "("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"unexpected {found}", col)

    def call(self, name: str, col: int) -> Expression:
        if name not in FUNCTIONS:
            raise ExprSyntaxError(f"unknown function {name!r}", col)
        self.expect("(")
        args = [self.expr()]
        while self.tok[:2] == ("op", ","):
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ExprSyntaxError(
                f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}", col
            )
        return Call(name, tuple(args))


def parse(src: str) -> Expression:
    return _Parser(src).parse()


# printer precedences; atoms bind tightest
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}
_ATOM = 5


def _prec(node: Expression) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return _ATOM


def _wrap(node: Expression, parens: bool) -> str:
    text = to_text(node)
    return f"({text})" if parens else text


def to_text(node: Expression) -> str:
    """Canonical text with minimal parentheses; ``parse(to_text(e)) == e``."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _prec(node.operand) < _PREC["neg"])
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_text(a) for a in node.args)})"
    p = _PREC[node.op]
    if node.op == "^":
        left = _wrap(node.left, _prec(node.left) <= p)
        right = _wrap(node.right, _prec(node.right) < _PREC["neg"])
    else:
        left = _wrap(node.left, _prec(node.left) < p)
        right = _wrap(node.right, _prec(node.right) <= p)
    return f"{left} {node.op} {right}" if p < 3 else f"{left}{node.op}{right}"


def is_constant(node: Expression) -> bool:
    if isinstance(node, Var):
        return node.name in CONSTANTS
    if isinstance(node, Num):
        return True
    if isinstance(node, Neg):
        return is_constant(node.operand)
    if isinstance(node, BinOp):
        return is_constant(node.left) and is_constant(node.right)
    return all(is_constant(a) for a in node.args)


def _power(node: Expression, base, expo):
    base, expo = np.broadcast_arrays(np.asarray(base, float), np.asarray(expo, float))
    if np.any((base == 0) & (expo < 0)):
        raise EvalError("zero raised to a negative power", to_text(node))
    if np.any((base < 0) & (expo != np.round(expo))):
        raise EvalError("negative base with non-integer exponent", to_text(node))
    return np.power(base, expo)


def _eval(node: Expression, env: dict):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        if node.op == "+":
            out = np.add(a, b)
        elif node.op == "-":
            out = np.subtract(a, b)
        elif node.op == "*":
            out = np.multiply(a, b)
        elif node.op == "/":
            if np.any(np.asarray(b) == 0):
                raise EvalError("division by zero", to_text(node))
            out = np.divide(a, b)
        else:
            out = _power(node, a, b)
    else:
        args = [_eval(a, env) for a in node.args]
        if node.name == "sqrt":
            if np.any(np.asarray(args[0]) < 0):
                raise EvalError("square root of a negative number", to_text(node))
            out = np.sqrt(args[0])
        elif node.name == "pow":
            out = _power(node, *args)
        else:
            out = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "abs": np.abs}[node.name](
                args[0]
            )
    if not np.all(np.isfinite(out)):
        raise EvalError("non-finite result", to_text(node))
    return out


def evaluate(e: Expression, t, x=0.0):
    """Evaluate ``e`` at ``(t, x)``; array inputs broadcast elementwise.

    Returns a float for scalar inputs and an ndarray otherwise.
    """
    scalar = np.ndim(t) == 0 and np.ndim(x) == 0
    env = {"t": np.asarray(t, dtype=float), "x": np.asarray(x, dtype=float), **CONSTANTS}
    with np.errstate(all="ignore"):
        out = _eval(e, env)
        out = np.broadcast_to(out, np.broadcast(env["t"], env["x"]).shape)
    return float(out) if scalar else np.array(out, dtype=float)
