"""Small expression language for the data ``f(t)`` and ``K(t, s)``.

Grammar::

    expr      := term (("+"|"-") term)*
    term      := factor (("*"|"/") factor)*
    factor    := "-" factor | power
    power     := atom ("^" factor)?
    atom      := number | var | "pi" | func "(" expr ("," expr)* ")"
               | "(" expr ")" | piecewise
    piecewise := "piecewise" "(" arm ("," arm)* "," "else" "->" expr ")"
    arm       := expr cmp expr "->" expr
    cmp       := "<" | "<=" | ">" | ">="

``^`` binds tightest and is right-associative, so ``-t^2`` is ``-(t^2)`` and
``2^3^2`` is ``2^(3^2)``.  There is no implicit multiplication.

Evaluation is vectorised over numpy arrays; the scalar :func:`evaluate` runs
the same code on one-element arrays so both paths give identical bits.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

__all__ = [
    "Expression", "Num", "Var", "Pi", "BinOp", "Neg", "Call", "Compare",
    "Piecewise", "ParseError", "EvaluationError", "parse", "unparse",
    "evaluate", "evaluate_array", "free_variables", "FUNCTIONS",
]


class ParseError(ValueError):
    """Syntax or scoping error; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class EvaluationError(ValueError):
    """Domain error or unbound variable during evaluation."""

    def __init__(self, message: str, subexpr: "Expression"):
        super().__init__(f"{message} in '{unparse(subexpr)}'")
        self.subexpr = subexpr


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Num:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 0:
            raise ValueError("numeric literals must be finite and non-negative")


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


@dataclass(frozen=True)
class Compare:
    op: str  # one of < <= > >=
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Piecewise:
    arms: tuple  # of (Compare, Expression)
    otherwise: "Expression"


Expression = Union[Num, Var, Pi, BinOp, Neg, Call, Piecewise]

# name -> (min arity, max arity or None)
FUNCTIONS = {
    "sin": (1, 1), "cos": (1, 1), "exp": (1, 1), "log": (1, 1),
    "abs": (1, 1), "sqrt": (1, 1), "min": (2, None), "max": (2, None),
}
_KEYWORDS = {"pi", "piecewise", "else"}
_CMP = ("<=", ">=", "<", ">")


def free_variables(expr: Expression) -> frozenset:
    """Names of the variables referenced anywhere in ``expr``."""
    if isinstance(expr, Var):
        return frozenset([expr.name])
    if isinstance(expr, (BinOp, Compare)):
        return free_variables(expr.left) | free_variables(expr.right)
    if isinstance(expr, Neg):
        return free_variables(expr.operand)
    if isinstance(expr, Call):
        return frozenset().union(*(free_variables(a) for a in expr.args))
    if isinstance(expr, Piecewise):
        out = free_variables(expr.otherwise)
        for guard, value in expr.arms:
            out |= free_variables(guard) | free_variables(value)
        return out
    return frozenset()


# ---------------------------------------------------------------------------
# Tokenizer and recursive-descent parser

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>->|<=|>=|[-+*/^(),<>])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Token:
    kind: str  # num, name, op, end
    text: str
    pos: int


def _tokenize(source: str) -> list:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, allowed_vars):
        self.tokens = _tokenize(source)
        self.i = 0
        self.allowed = frozenset(allowed_vars)

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        if self.tok.text != text or self.tok.kind not in ("op", "name"):
            found = self.tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", self.tok.pos)
        return self.advance()

    def parse(self) -> Expression:
        expr = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return expr

    def expr(self) -> Expression:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expression:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Expression:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            value = float(tok.text)
            if not math.isfinite(value):
                raise ParseError("numeric literal overflows", tok.pos)
            return Num(value)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "name":
            if tok.text == "pi":
                self.advance()
                return Pi()
            if tok.text == "piecewise":
                return self.piecewise()
            if tok.text in FUNCTIONS:
                return self.call()
            if tok.text in _KEYWORDS:
                raise ParseError(f"unexpected keyword {tok.text!r}", tok.pos)
            if tok.text not in self.allowed:
                allowed = ", ".join(sorted(self.allowed)) or "none"
                raise ParseError(
                    f"variable {tok.text!r} not allowed here (allowed: {allowed})",
                    tok.pos)
            self.advance()
            return Var(tok.text)
        found = tok.text or "end of input"
        raise ParseError(f"unexpected {found!r}", tok.pos)

    def call(self) -> Expression:
        name_tok = self.advance()
        self.expect("(")
        args = [self.expr()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        lo, hi = FUNCTIONS[name_tok.text]
        if len(args) < lo or (hi is not None and len(args) > hi):
            raise ParseError(
                f"{name_tok.text} takes {lo if hi == lo else f'at least {lo}'} "
                f"argument(s), got {len(args)}", name_tok.pos)
        return Call(name_tok.text, tuple(args))

    def piecewise(self) -> Expression:
        start = self.advance().pos
        self.expect("(")
        if self.tok.kind == "op" and self.tok.text == ")":
            raise ParseError("empty piecewise", self.tok.pos)
        arms = []
        while True:
            if self.tok.kind == "name" and self.tok.text == "else":
                self.advance()
                self.expect("->")
                otherwise = self.expr()
                self.expect(")")
                break
            if self.tok.kind == "end" or (self.tok.kind == "op" and self.tok.text == ")"):
                raise ParseError("piecewise lacks a final 'else' arm", self.tok.pos)
            left = self.expr()
            if not (self.tok.kind == "op" and self.tok.text in _CMP):
                raise ParseError("expected comparison in piecewise arm", self.tok.pos)
            op = self.advance().text
            right = self.expr()
            self.expect("->")
            arms.append((Compare(op, left, right), self.expr()))
            if not (self.tok.kind == "op" and self.tok.text == ","):
                raise ParseError("piecewise lacks a final 'else' arm", self.tok.pos)
            self.advance()
        if not arms:
            raise ParseError("piecewise needs at least one guarded arm", start)
        return Piecewise(tuple(arms), otherwise)


def parse(source: str, allowed_vars=("t",)) -> Expression:
    """Parse ``source`` into an AST.

    Raises :class:`ParseError` with a 0-based position on syntax errors and on
    variables outside ``allowed_vars``.
    """
    return _Parser(source, allowed_vars).parse()


# ---------------------------------------------------------------------------
# Unparse

_PREC_SUM, _PREC_PRODUCT, _PREC_UNARY, _PREC_ATOM = 1, 2, 3, 5


def _prec(expr: Expression) -> int:
    if isinstance(expr, BinOp):
        return {"+": _PREC_SUM, "-": _PREC_SUM, "*": _PREC_PRODUCT,
                "/": _PREC_PRODUCT, "^": 4}[expr.op]
    if isinstance(expr, Neg):
        return _PREC_UNARY
    return _PREC_ATOM


def _wrap(expr: Expression, min_prec: int) -> str:
    text = unparse(expr)
    return f"({text})" if _prec(expr) < min_prec else text


def _format_number(value: float) -> str:
    if value.is_integer() and value < 1e16:
        return str(int(value))
    return repr(value)


def unparse(expr: Expression) -> str:
    """Render ``expr`` with the fewest parentheses that re-parse identically."""
    if isinstance(expr, Num):
        return _format_number(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Pi):
        return "pi"
    if isinstance(expr, Neg):
        return "-" + _wrap(expr.operand, _PREC_UNARY)
    if isinstance(expr, BinOp):
        if expr.op == "^":
            return f"{_wrap(expr.left, _PREC_ATOM)}^{_wrap(expr.right, _PREC_UNARY)}"
        if expr.op in "+-":
            return f"{_wrap(expr.left, _PREC_SUM)}{expr.op}{_wrap(expr.right, _PREC_PRODUCT)}"
        return f"{_wrap(expr.left, _PREC_PRODUCT)}{expr.op}{_wrap(expr.right, _PREC_UNARY)}"
    if isinstance(expr, Call):
        return f"{expr.name}({', '.join(unparse(a) for a in expr.args)})"
    if isinstance(expr, Compare):
        return f"{unparse(expr.left)} {expr.op} {unparse(expr.right)}"
    if isinstance(expr, Piecewise):
        arms = [f"{unparse(g)} -> {unparse(v)}" for g, v in expr.arms]
        arms.append(f"else -> {unparse(expr.otherwise)}")
        return f"piecewise({', '.join(arms)})"
    raise TypeError(f"not an expression node: {expr!r}")


# ---------------------------------------------------------------------------
# Evaluation

Env = Mapping[str, np.ndarray]


def _check_finite(value: np.ndarray, node: Expression) -> np.ndarray:
    if not np.all(np.isfinite(value)):
        raise EvaluationError("non-finite result", node)
    return value


def _eval(node: Expression, env: Env, guard_env: Env, size: int) -> np.ndarray:
    if isinstance(node, Num):
        return np.full(size, node.value)
    if isinstance(node, Pi):
        return np.full(size, math.pi)
    if isinstance(node, Var):
        if node.name not in env:
            raise EvaluationError(f"unbound variable {node.name!r}", node)
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env, guard_env, size)
    if isinstance(node, BinOp):
        left = _eval(node.left, env, guard_env, size)
        right = _eval(node.right, env, guard_env, size)
        with np.errstate(all="ignore"):
            if node.op == "+":
                out = left + right
            elif node.op == "-":
                out = left - right
            elif node.op == "*":
                out = left * right
            elif node.op == "/":
                if np.any(right == 0):
                    raise EvaluationError("division by zero", node)
                out = left / right
            else:
                if np.any((left == 0) & (right < 0)):
                    raise EvaluationError("zero raised to a negative power", node)
                out = np.power(left, right)
                if np.any(np.isnan(out)):
                    raise EvaluationError("negative base with non-integer exponent", node)
        return _check_finite(out, node)
    if isinstance(node, Call):
        args = [_eval(a, env, guard_env, size) for a in node.args]
        x = args[0]
        with np.errstate(all="ignore"):
            if node.name == "log":
                if np.any(x <= 0):
                    raise EvaluationError("log of non-positive value", node)
                out = np.log(x)
            elif node.name == "sqrt":
                if np.any(x < 0):
                    raise EvaluationError("sqrt of negative value", node)
                out = np.sqrt(x)
            elif node.name == "min":
                out = args[0]
                for a in args[1:]:
                    out = np.minimum(out, a)
            elif node.name == "max":
                out = args[0]
                for a in args[1:]:
                    out = np.maximum(out, a)
            else:
                out = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}[node.name](x)
        return _check_finite(out, node)
    if isinstance(node, Piecewise):
        out = np.empty(size)
        pending = np.arange(size)
        for guard, value in node.arms:
            if pending.size == 0:
                break
            sub_guard = {k: v[pending] for k, v in guard_env.items()}
            left = _eval(guard.left, sub_guard, sub_guard, pending.size)
            right = _eval(guard.right, sub_guard, sub_guard, pending.size)
            hit = _compare(guard.op, left, right)
            chosen = pending[hit]
            if chosen.size:
                sub = {k: v[chosen] for k, v in env.items()}
                sub_g = {k: v[chosen] for k, v in guard_env.items()}
                out[chosen] = _eval(value, sub, sub_g, chosen.size)
            pending = pending[~hit]
        if pending.size:
            sub = {k: v[pending] for k, v in env.items()}
            sub_g = {k: v[pending] for k, v in guard_env.items()}
            out[pending] = _eval(node.otherwise, sub, sub_g, pending.size)
        return out
    raise TypeError(f"not an expression node: {node!r}")


def _compare(op: str, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    return left >= right


def evaluate_array(expr: Expression, t, s=None, *,
                   guard_t=None) -> np.ndarray:
    """Evaluate ``expr`` elementwise over broadcast arrays ``t`` and ``s``.

    ``guard_t``, when given, replaces ``t`` inside piecewise guards only; it is
    how samplers pick one-sided limits at jumps.
    """
    arrays = [np.asarray(t, dtype=float)]
    if s is not None:
        arrays.append(np.asarray(s, dtype=float))
    if guard_t is not None:
        arrays.append(np.asarray(guard_t, dtype=float))
    arrays = np.broadcast_arrays(*arrays)
    shape = arrays[0].shape
    flat = [a.ravel() for a in arrays]
    env = {"t": flat[0]}
    if s is not None:
        env["s"] = flat[1]
    guard_env = dict(env)
    if guard_t is not None:
        guard_env["t"] = flat[-1]
    out = _eval(expr, env, guard_env, flat[0].size)
    return out.reshape(shape)


def evaluate(expr: Expression, t: float, s: Optional[float] = None) -> float:
    """Evaluate ``expr`` at a single point."""
    return float(evaluate_array(expr, np.array([t]),
                                None if s is None else np.array([s]))[0])
