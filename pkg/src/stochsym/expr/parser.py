"""Recursive-descent parser for the expression grammar.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' expon)?          # right associative
    expon  := '-' expon | power
    atom   := number | ident | ident '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import re
from typing import Iterable

from .nodes import FUNCTIONS, MINUS_ONE, Add, Dec, Expr, Func, Mul, Neg, Num, Pow, Var


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str = "") -> None:
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class UnknownIdentifierError(ValueError):
    def __init__(self, name: str, position: int) -> None:
        self.name = name
        self.position = position
        super().__init__(f"unknown identifier {name!r} at position {position}")


_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, names: frozenset[str] | None) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = names

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, v, pos = self.take()
        if v != value or kind != "op":
            found = "end of input" if kind == "end" else repr(v)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos, self.text)

    def parse(self) -> Expr:
        e = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {v!r}", pos, self.text)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = Add((e, rhs if op == "+" else Neg(rhs)))
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            e = Mul((e, rhs if op == "*" else Pow(rhs, MINUS_ONE)))
        return e

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Pow(base, self.expon())
        return base

    def expon(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.expon())
        return self.power()

    def atom(self) -> Expr:
        kind, v, pos = self.take()
        if kind == "num":
            if re.fullmatch(r"\d+", v):
                return Num(int(v))
            return Dec(float(v))
        if kind == "ident":
            if self.peek()[:2] == ("op", "("):
                if v not in FUNCTIONS:
                    raise UnknownIdentifierError(v, pos)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Func(v, arg)
            if v in FUNCTIONS:
                raise ExprSyntaxError(f"function {v!r} needs an argument", pos, self.text)
            if self.names is not None and v not in self.names:
                raise UnknownIdentifierError(v, pos)
            return Var(v)
        if kind == "op" and v == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(v)
        raise ExprSyntaxError(f"unexpected {found}", pos, self.text)


def parse(text: str, space=None) -> Expr:
    """Parse ``text`` into an expression tree.

    ``space`` is a :class:`VarSpace`, an iterable of allowed names, or None
    to accept any identifier.
    """
    names: frozenset[str] | None
    if space is None:
        names = None
    elif hasattr(space, "all_names"):
        names = frozenset(space.all_names)
    else:
        names = frozenset(space)
    return _Parser(text, names).parse()


def identifiers(text: str) -> list[str]:
    """Variable identifiers in ``text`` in order of first appearance."""
    seen: list[str] = []
    toks = _tokenize(text)
    for k, (kind, v, _) in enumerate(toks):
        if kind == "ident" and v not in FUNCTIONS and v not in seen:
            nxt = toks[k + 1]
            if nxt[:2] != ("op", "("):
                seen.append(v)
    return seen


def parse_many(texts: Iterable[str], space=None) -> tuple[Expr, ...]:
    return tuple(parse(t, space) for t in texts)
