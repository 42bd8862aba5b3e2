"""Parsing and evaluation of scalar math expressions in the variables x, t, u.

Kernels, right-hand sides, nonlinearities and exact solutions are written as
plain text in configuration files; this module turns them into immutable
syntax trees that evaluate on scalars and numpy arrays alike.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

VARIABLES = ("x", "t", "u")

# name -> arity; everything is unary except pow
FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "exp": 1,
    "ln": 1,
    "sqrt": 1,
    "abs": 1,
    "pow": 2,
}

CONSTANTS = {"pi": math.pi, "e": math.e}


class ParseError(ValueError):
    """Syntax error; carries the byte offset of the offending token."""

    def __init__(self, message: str, source: str, pos: int):
        self.source = source
        self.pos = pos
        super().__init__(f"{message} at offset {pos}: {source!r}")


class EvalError(ValueError):
    """Evaluation failure; carries the offending node."""

    def __init__(self, message: str, node):
        self.node = node
        super().__init__(f"{message} in {unparse(node)!r} (offset {node.pos})")


@dataclass(frozen=True)
class Num:
    value: float
    pos: int = -1


@dataclass(frozen=True)
class Var:
    name: str
    pos: int = -1

    def __post_init__(self):
        if self.name not in VARIABLES:
            raise ValueError(f"variable must be one of {VARIABLES}: {self.name!r}")


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: int = -1


@dataclass(frozen=True)
class Bin:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    pos: int = -1


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple
    pos: int = -1


Expr = Num | Var | Neg | Bin | Call

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            stripped = source[pos:].lstrip()
            at = len(source) - len(stripped)
            if not stripped:
                break
            raise ParseError(f"unknown token {stripped[0]!r}", source, at)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


_BINARY_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_BP = 30
_RIGHT_ASSOC = {"^"}


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, got, pos = self.advance()
        if got != text:
            raise ParseError(f"expected {text!r}, found {got or 'end of input'!r}",
                             self.source, pos)

    def expression(self, min_bp: int = 0) -> Expr:
        lhs = self._prefix()
        while True:
            kind, text, pos = self.peek()
            if kind != "op" or text not in _BINARY_BP:
                break
            bp = _BINARY_BP[text]
            if bp <= min_bp:
                break
            self.advance()
            rhs = self.expression(bp - 1 if text in _RIGHT_ASSOC else bp)
            lhs = Bin(text, lhs, rhs, pos)
        return lhs

    def _prefix(self) -> Expr:
        kind, text, pos = self.advance()
        if kind == "num":
            return Num(float(text), pos)
        if kind == "name":
            if text in FUNCTIONS:
                return self._call(text, pos)
            if text in CONSTANTS:
                return Num(CONSTANTS[text], pos)
            if text in VARIABLES:
                return Var(text, pos)
            raise ParseError(f"unknown identifier {text!r}", self.source, pos)
        if text == "(":
            inner = self.expression(0)
            self.expect(")")
            return inner
        if text == "-":
            return Neg(self.expression(_UNARY_BP), pos)
        raise ParseError(f"unexpected {text or 'end of input'!r}", self.source, pos)

    def _call(self, fn: str, pos: int) -> Call:
        self.expect("(")
        args = [self.expression(0)]
        while self.peek()[1] == ",":
            self.advance()
            args.append(self.expression(0))
        self.expect(")")
        if len(args) != FUNCTIONS[fn]:
            raise ParseError(
                f"{fn} takes {FUNCTIONS[fn]} argument(s), got {len(args)}",
                self.source, pos)
        return Call(fn, tuple(args), pos)


def parse(source: str) -> Expr:
    """Parse text into an expression tree.

    Precedence, tightest first: ^ (right associative), unary minus, * /, + -.
    Raises ParseError with a byte offset on malformed input.
    """
    if not source or not source.strip():
        raise ParseError("empty expression", source, 0)
    p = _Parser(source)
    e = p.expression(0)
    kind, text, pos = p.peek()
    if kind != "end":
        raise ParseError(f"trailing input {text!r}", source, pos)
    return e


def _power(base, exponent, node):
    b = np.asarray(base, dtype=float)
    p = np.asarray(exponent, dtype=float)
    if np.any((b < 0) & (p != np.floor(p))):
        raise EvalError("fractional power of negative base", node)
    if np.any((b == 0) & (p < 0)):
        raise EvalError("zero raised to a negative power", node)
    out = np.power(b, p)
    if np.ndim(base) == 0 and np.ndim(exponent) == 0:
        return float(out)
    return out


def evaluate(e: Expr, bindings: dict):
    """Evaluate ``e`` with variable bindings (scalars or numpy arrays).

    Raises EvalError on unbound variables and domain errors (ln of a
    non-positive value, sqrt of a negative, division by zero, bad powers).
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return bindings[e.name]
        except KeyError:
            raise EvalError(f"unbound variable {e.name!r}", e) from None
    if isinstance(e, Neg):
        return -evaluate(e.operand, bindings)
    if isinstance(e, Bin):
        lhs = evaluate(e.lhs, bindings)
        rhs = evaluate(e.rhs, bindings)
        if e.op == "+":
            return lhs + rhs
        if e.op == "-":
            return lhs - rhs
        if e.op == "*":
            return lhs * rhs
        if e.op == "/":
            if np.any(np.asarray(rhs) == 0):
                raise EvalError("division by zero", e)
            return lhs / rhs
        if e.op == "^":
            return _power(lhs, rhs, e)
        raise EvalError(f"unknown operator {e.op!r}", e)
    if isinstance(e, Call):
        vals = [evaluate(a, bindings) for a in e.args]
        v = vals[0]
        if e.fn == "sin":
            return np.sin(v)
        if e.fn == "cos":
            return np.cos(v)
        if e.fn == "tan":
            return np.tan(v)
        if e.fn == "exp":
            return np.exp(v)
        if e.fn == "ln":
            if np.any(np.asarray(v) <= 0):
                raise EvalError("ln of a non-positive value", e)
            return np.log(v)
        if e.fn == "sqrt":
            if np.any(np.asarray(v) < 0):
                raise EvalError("sqrt of a negative value", e)
            return np.sqrt(v)
        if e.fn == "abs":
            return np.abs(v)
        if e.fn == "pow":
            return _power(vals[0], vals[1], e)
        raise EvalError(f"unknown function {e.fn!r}", e)
    raise TypeError(f"not an expression node: {e!r}")


def unparse(e: Expr) -> str:
    """Emit fully parenthesized text that parses back to an equivalent tree."""
    if isinstance(e, Num):
        return format(e.value, ".17g")
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{unparse(e.operand)})"
    if isinstance(e, Bin):
        return f"({unparse(e.lhs)}{e.op}{unparse(e.rhs)})"
    if isinstance(e, Call):
        return f"{e.fn}({','.join(unparse(a) for a in e.args)})"
    raise TypeError(f"not an expression node: {e!r}")


def variables(e: Expr) -> set:
    """Set of variable names occurring in the tree."""
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return variables(e.operand)
    if isinstance(e, Bin):
        return variables(e.lhs) | variables(e.rhs)
    if isinstance(e, Call):
        out = set()
        for a in e.args:
            out |= variables(a)
        return out
    return set()
