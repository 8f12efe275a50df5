"""Arithmetic expressions in one variable ``x``, compiled to numpy evaluators.

Grammar (precedence climbing, lowest to highest)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := atom ('^' unary)?          # right associative
    atom    := NUMBER | 'x' | 'pi' | 'e' | FUNC '(' expr ')' | '(' expr ')'

``**`` is accepted as a synonym for ``^``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "exp": np.exp,
    "cos": np.cos,
    "sin": np.sin,
    "sqrt": np.sqrt,
}
CONSTANTS = {"pi": np.pi, "e": np.e}

_BINARY = {
    "+": (10, np.add),
    "-": (10, np.subtract),
    "*": (20, np.multiply),
    "/": (20, np.divide),
}
_POW_PREC = 30
_UNARY_PREC = 25

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^()]))"
)


class ExpressionSyntaxError(ValueError):
    """Raised with the character offset and the set of tokens that would have been valid."""

    def __init__(self, offset: int, expected: set[str], found: str):
        self.offset = offset
        self.expected = frozenset(expected)
        self.found = found
        want = ", ".join(sorted(self.expected))
        super().__init__(f"syntax error at offset {offset}: expected {want}, found {found!r}")


@dataclass(frozen=True)
class _Tok:
    kind: str  # num | name | op | end
    text: str
    pos: int


def tokenize(src: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            pos = len(src)
            break
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            bad = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ExpressionSyntaxError(bad, {"number", "name", "operator"}, src[bad])
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", len(src)))
    return toks


# AST nodes are plain tuples: ("num", v) | ("var",) | ("neg", a) | ("bin", op, a, b) | ("call", f, a)


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, expected: set[str]):
        t = self.tok
        raise ExpressionSyntaxError(t.pos, expected, t.text or "end of input")

    def parse(self):
        node = self.expr(0)
        if self.tok.kind != "end":
            self.fail({"operator", "end of input"})
        return node

    def expr(self, min_prec: int):
        left = self.unary()
        while True:
            t = self.tok
            if t.kind != "op" or t.text not in _BINARY:
                return left
            prec = _BINARY[t.text][0]
            if prec < min_prec:
                return left
            self.i += 1
            right = self.expr(prec + 1)
            left = ("bin", t.text, left, right)

    def unary(self):
        t = self.tok
        if t.kind == "op" and t.text in "+-":
            self.i += 1
            operand = self.unary()
            return ("neg", operand) if t.text == "-" else operand
        return self.power()

    def power(self):
        base = self.atom()
        t = self.tok
        if t.kind == "op" and t.text in ("^", "**"):
            self.i += 1
            return ("bin", "^", base, self.unary())
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return ("num", float(t.text))
        if t.kind == "name":
            self.i += 1
            if t.text == "x":
                return ("var",)
            if t.text in CONSTANTS:
                return ("num", CONSTANTS[t.text])
            if t.text in FUNCTIONS:
                if not (self.tok.kind == "op" and self.tok.text == "("):
                    self.fail({"("})
                self.i += 1
                arg = self.expr(0)
                self._close()
                return ("call", t.text, arg)
            raise ExpressionSyntaxError(t.pos, {"x", *CONSTANTS, *FUNCTIONS}, t.text)
        if t.kind == "op" and t.text == "(":
            self.i += 1
            inner = self.expr(0)
            self._close()
            return inner
        self.fail({"operand"})

    def _close(self):
        if not (self.tok.kind == "op" and self.tok.text == ")"):
            self.fail({")"})
        self.i += 1


def parse(src: str):
    """Parse ``src`` into a tuple AST. Raises :class:`ExpressionSyntaxError`."""
    return _Parser(src).parse()


def _eval(node, x: np.ndarray):
    kind = node[0]
    if kind == "num":
        return np.full_like(x, node[1])
    if kind == "var":
        return x
    if kind == "neg":
        return -_eval(node[1], x)
    if kind == "call":
        return FUNCTIONS[node[1]](_eval(node[2], x))
    _, op, a, b = node
    if op == "^":
        return np.power(_eval(a, x), _eval(b, x))
    return _BINARY[op][1](_eval(a, x), _eval(b, x))


def compile_expr(src: str) -> Callable:
    """Return a vectorized evaluator ``f(x)`` for ``src``.

    Scalars in give a float out; arrays in give an array of the same shape.
    """
    tree = parse(src)

    def evaluator(x):
        arr = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = _eval(tree, np.atleast_1d(arr))
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    evaluator.source = src
    return evaluator
