"""Flow expressions: a tiny grammar over literals, identifiers, negation, + - *.

Grammar (left-associative, ``*`` binds tighter than ``+``/``-``)::

    expr  := term (('+' | '-') term)*
    term  := unary ('*' unary)*
    unary := '-' unary | atom
    atom  := NUMBER | IDENT | '(' expr ')'

:func:`render` is the exact inverse of :func:`parse` on trees built by
:func:`parse`, so ``parse(render(e)) == e`` holds structurally.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from .errors import ExpressionSyntaxError, UnboundSymbolError

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
NUMBER_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?\Z")
SIGNED_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?\Z")

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*()]))"
)


def format_real(value: float) -> str:
    """Shortest round-trip decimal for ``value``; integral values drop ``.0``."""
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"cannot format non-finite value {value!r}")
    if value == 0.0:
        return "0"
    text = repr(value)
    if text.endswith(".0"):
        text = text[:-2]
    return text


@dataclass(frozen=True)
class Num:
    """Numeric literal kept as its decimal text so it re-serializes bit-exactly."""

    text: str

    def __post_init__(self):
        if not NUMBER_RE.match(self.text):
            raise ExpressionSyntaxError(f"not an unsigned decimal literal: {self.text!r}")

    @property
    def value(self) -> float:
        return float(self.text)

    @classmethod
    def of(cls, value: float) -> "Num":
        return cls(format_real(value))


@dataclass(frozen=True)
class Ref:
    name: str

    def __post_init__(self):
        if not IDENT_RE.match(self.name):
            raise ExpressionSyntaxError(f"not an identifier: {self.name!r}")


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"

    def __post_init__(self):
        if self.op not in ("+", "-", "*"):
            raise ExpressionSyntaxError(f"unsupported operator {self.op!r}")


Expression = Union[Num, Ref, Neg, BinOp]


def refs(e: Expression) -> Iterator[str]:
    """Yield every identifier referenced by ``e`` (with repeats, left to right)."""
    if isinstance(e, Ref):
        yield e.name
    elif isinstance(e, Neg):
        yield from refs(e.operand)
    elif isinstance(e, BinOp):
        yield from refs(e.left)
        yield from refs(e.right)


def evaluate(e: Expression, env: Mapping[str, float]) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Ref):
        try:
            return float(env[e.name])
        except KeyError:
            raise UnboundSymbolError(f"unbound symbol {e.name!r}") from None
    if isinstance(e, Neg):
        return -evaluate(e.operand, env)
    a = evaluate(e.left, env)
    b = evaluate(e.right, env)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    return a * b


# -- rendering ---------------------------------------------------------------

def _is_additive(e: Expression) -> bool:
    return isinstance(e, BinOp) and e.op in "+-"


def render(e: Expression) -> str:
    """Render with minimal parentheses: spaces around ``+``/``-``, none around ``*``."""
    if isinstance(e, Num):
        return e.text
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, Neg):
        inner = render(e.operand)
        if isinstance(e.operand, (Num, Ref)):
            return "-" + inner
        return "-(" + inner + ")"
    left = render(e.left)
    right = render(e.right)
    if e.op == "*":
        if _is_additive(e.left):
            left = f"({left})"
        if isinstance(e.right, (BinOp, Neg)):
            right = f"({right})"
        return f"{left}*{right}"
    if _is_additive(e.right) or isinstance(e.right, Neg):
        right = f"({right})"
    return f"{left} {e.op} {right}"


# -- parsing -----------------------------------------------------------------

def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {text[pos:].strip()[:1]!r} in {text!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def fail(self, what: str):
        raise ExpressionSyntaxError(f"{what} in expression {self.text!r}")

    def expr(self) -> Expression:
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.unary()
        while self.peek() == ("op", "*"):
            self.take()
            node = BinOp("*", node, self.unary())
        return node

    def unary(self) -> Expression:
        if self.peek() == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Expression:
        kind, value = self.take()
        if kind == "num":
            return Num(value)
        if kind == "ident":
            return Ref(value)
        if (kind, value) == ("op", "("):
            node = self.expr()
            if self.take() != ("op", ")"):
                self.fail("missing ')'")
            return node
        self.fail("unexpected end of input" if kind is None else f"unexpected token {value!r}")


def parse(text: str) -> Expression:
    p = _Parser(text)
    node = p.expr()
    if p.pos != len(p.tokens):
        p.fail(f"trailing token {p.peek()[1]!r}")
    return node
