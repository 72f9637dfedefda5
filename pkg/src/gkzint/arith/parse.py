"""Expression grammar shared by problem files, golden files and the printer.

::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" INTEGER)?
    atom   := INTEGER | SYMBOL | "(" expr ")"

Symbols match ``[A-Za-z][A-Za-z0-9_]*``.  Error offsets are UTF-8 byte offsets.
Parsing builds a small AST which is then folded by a *builder*, so the same
grammar produces rational functions, parameter fractions, polynomials and
(with ``d<name>`` symbols) differential operators.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import ParseError, UnknownSymbolError
from .fields import ParamRat, RatFunc, Ring
from .mpoly import MPoly

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<sym>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")


def _byte_offset(text: str, i: int) -> int:
    return len(text[:i].encode("utf-8"))


def tokenize(text: str):
    pos = 0
    out = []
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos), text)
        start = m.start(m.lastgroup)
        out.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    out.append(("end", "", n))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, _byte_offset(self.text, tok[2]), self.text)

    def parse(self):
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        node = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected token {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = ("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.take()
            rhs = self.unary()
            node = ("mul", node, rhs) if op[1] == "*" else ("div", node, rhs, op[2])
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        if self.peek()[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            tok = self.peek()
            if tok[0] != "int":
                raise self.error("exponent must be a non-negative integer")
            self.take()
            return ("pow", base, int(tok[1]))
        return base

    def atom(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "int":
            return ("int", int(val))
        if kind == "sym":
            return ("sym", val, _byte_offset(self.text, tok[2]))
        if (kind, val) == ("op", "("):
            node = self.expr()
            if self.peek()[:2] != ("op", ")"):
                raise self.error("expected ')'")
            self.take()
            return node
        raise self.error(f"unexpected token {val!r}" if val else "unexpected end of input", tok)


def parse_ast(text: str):
    return _Parser(text).parse()


def fold(node, builder, text: str = ""):
    """Evaluate an AST with ``builder`` (an object with const/symbol/div hooks)."""
    kind = node[0]
    if kind == "int":
        return builder.const(node[1])
    if kind == "sym":
        return builder.symbol(node[1], node[2], text)
    if kind == "neg":
        return -fold(node[1], builder, text)
    if kind == "pow":
        return builder.power(fold(node[1], builder, text), node[2])
    a = fold(node[1], builder, text)
    b = fold(node[2], builder, text)
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return builder.mul(a, b)
    if kind == "div":
        return builder.div(a, b, node[3], text)
    raise AssertionError(kind)


class _FieldBuilder:
    def __init__(self, ring: Ring, kind: str):
        self.ring = ring
        self.kind = kind

    def const(self, v):
        return self.ring.pconst(v) if self.kind == "param" else self.ring.const(v)

    def symbol(self, name, offset, text):
        ring = self.ring
        if self.kind == "param":
            if name in ring.params:
                return ring.param(name)
        elif name in ring.params or name in ring.zvars:
            return ring.symbol(name)
        raise UnknownSymbolError(name, offset, text)

    def mul(self, a, b):
        return a * b

    def power(self, a, k):
        return a**k

    def div(self, a, b, offset, text):
        if b.is_zero():
            raise ParseError("division by zero", offset, text)
        return a / b


class _PolyBuilder:
    def __init__(self, variables):
        self.variables = tuple(variables)

    def const(self, v):
        return MPoly.constant(self.variables, Fraction(v))

    def symbol(self, name, offset, text):
        if name not in self.variables:
            raise UnknownSymbolError(name, offset, text)
        return MPoly.gen(self.variables, name)

    def mul(self, a, b):
        return a * b

    def power(self, a, k):
        return a**k

    def div(self, a, b, offset, text):
        if b.total_degree() != 0:
            raise ParseError("polynomial division by a non-constant", offset, text)
        c = b.terms.get((0,) * len(self.variables), Fraction(0))
        if c == 0:
            raise ParseError("division by zero", offset, text)
        return a * (Fraction(1) / c)


def parse_expr(text: str, ring: Ring, kind: str = "ratfunc"):
    """Parse ``text`` into an element of ``ring``.

    ``kind`` selects the target: ``"ratfunc"`` (Q(δ)(z)), ``"param"`` (Q(δ)),
    or ``"poly"`` (an :class:`MPoly` over Q in z-variables then parameters).
    """
    node = parse_ast(text)
    if kind == "poly":
        return fold(node, _PolyBuilder(ring.zvars + ring.params), text)
    if kind not in ("ratfunc", "param"):
        raise ValueError(f"unknown parse target {kind!r}")
    return fold(node, _FieldBuilder(ring, kind), text)


def parse_param(text: str, ring: Ring) -> ParamRat:
    return parse_expr(text, ring, "param")


def parse_ratfunc(text: str, ring: Ring) -> RatFunc:
    return parse_expr(text, ring, "ratfunc")
