"""Arithmetic expressions in the single variable ``s``.

Used for initial-history data such as ``sin(s)+2``.  The grammar is
deliberately small: numeric constants, the variable ``s``, unary minus,
``sin``/``cos``/``exp``, and the binary operators ``+ - * / ^`` with
conventional precedence (``^`` binds tightest, right-associative).
Expressions evaluate on scalars or numpy arrays.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import CrnParseError

__all__ = ["Num", "Var", "Unary", "Binary", "parse_expression", "ExprNode"]

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
_NUM_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Num:
    value: float

    def eval(self, s):
        return np.broadcast_to(np.float64(self.value), np.shape(s)).copy() if np.ndim(s) else float(self.value)


@dataclass(frozen=True)
class Var:
    def eval(self, s):
        return np.asarray(s, dtype=float) if np.ndim(s) else float(s)


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg', 'sin', 'cos', 'exp'
    operand: "ExprNode"

    def eval(self, s):
        val = self.operand.eval(s)
        if self.op == "neg":
            return -val
        return _FUNCTIONS[self.op](val)


@dataclass(frozen=True)
class Binary:
    op: str  # '+', '-', '*', '/', '^'
    left: "ExprNode"
    right: "ExprNode"

    def eval(self, s):
        a = self.left.eval(s)
        b = self.right.eval(s)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            with np.errstate(divide="ignore", invalid="ignore"):
                return a / b
        with np.errstate(invalid="ignore"):
            return np.power(a, b)


ExprNode = Union[Num, Var, Unary, Binary]


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, message: str) -> CrnParseError:
        return CrnParseError(f"{message} in expression {self.text!r}", column=self.pos + 1)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def parse(self) -> ExprNode:
        node = self.expr()
        if self.peek():
            raise self.fail("unexpected trailing text")
        return node

    def expr(self) -> ExprNode:
        node = self.term()
        while True:
            if self.take("+"):
                node = Binary("+", node, self.term())
            elif self.take("-"):
                node = Binary("-", node, self.term())
            else:
                return node

    def term(self) -> ExprNode:
        node = self.factor()
        while True:
            if self.take("*"):
                node = Binary("*", node, self.factor())
            elif self.take("/"):
                node = Binary("/", node, self.factor())
            else:
                return node

    def factor(self) -> ExprNode:
        if self.take("-"):
            return Unary("neg", self.factor())
        return self.power()

    def power(self) -> ExprNode:
        base = self.atom()
        if self.take("^"):
            return Binary("^", base, self.factor())  # right-associative exponent
        return base

    def atom(self) -> ExprNode:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            node = self.expr()
            if not self.take(")"):
                raise self.fail("missing ')'")
            return node
        m = _NUM_RE.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return Num(float(m.group(0)))
        m = _NAME_RE.match(self.text, self.pos)
        if m:
            name = m.group(0)
            self.pos = m.end()
            if name == "s":
                return Var()
            if name in _FUNCTIONS:
                if not self.take("("):
                    raise self.fail(f"{name} needs parenthesized argument")
                node = self.expr()
                if not self.take(")"):
                    raise self.fail("missing ')'")
                return Unary(name, node)
            raise self.fail(f"unknown name {name!r}")
        raise self.fail("expected a number, 's', a function or '('")


def parse_expression(text: str) -> ExprNode:
    """Parse one expression over the variable ``s``."""
    if not text.strip():
        raise CrnParseError("empty expression")
    return _Parser(text).parse()
