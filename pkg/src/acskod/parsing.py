"""Recursive-descent parser for the scalar expression grammar.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?
    atom   := INTEGER | IDENT | '(' expr ')'

``i`` and ``pi`` are reserved identifiers; every other identifier must be
declared by the caller.  Exponents must evaluate to integer constants.
Results are :class:`~acskod.scalars.RatFn` values; use :func:`parse_coeff`
or :func:`parse_scalar` when a polynomial or a constant is required.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .scalars import I, PI, CoeffFn, RatFn, Scalar

__all__ = ["ExprSyntaxError", "parse_expr", "parse_coeff", "parse_scalar", "parse_integer"]

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


class ExprSyntaxError(ValueError):
    """Grammar or semantic error inside one expression string."""

    def __init__(self, message: str, text: str, column: int):
        self.text = text
        self.column = column
        self.bare = message
        super().__init__(f"{message} at column {column}: {text!r}")


@dataclass
class _Tok:
    kind: str  # 'int', 'id', 'op', 'end'
    value: str
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        mt = _TOKEN.match(text, pos)
        if mt is None:  # pragma: no cover - regex always matches non-space
            raise ExprSyntaxError("unexpected character", text, pos + 1)
        col = mt.start(mt.lastindex) + 1
        if mt.group(1) is not None:
            toks.append(_Tok("int", mt.group(1), col))
        elif mt.group(2) is not None:
            toks.append(_Tok("id", mt.group(2), col))
        else:
            ch = mt.group(3)
            if ch not in "+-*/^()":
                raise ExprSyntaxError(f"unexpected character {ch!r}", text, col)
            toks.append(_Tok("op", ch, col))
        pos = mt.end()
    toks.append(_Tok("end", "", n + 1))
    return toks


class _Parser:
    def __init__(self, text: str, symbols: frozenset[str] | None):
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0
        self.symbols = symbols

    def peek(self) -> _Tok:
        return self.toks[self.k]

    def take(self) -> _Tok:
        t = self.toks[self.k]
        self.k += 1
        return t

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ExprSyntaxError(msg, self.text, tok.col)

    def parse(self) -> RatFn:
        if self.peek().kind == "end":
            self.error("empty expression")
        v = self.expr()
        if self.peek().kind != "end":
            self.error(f"unexpected token {self.peek().value!r}")
        return v

    def expr(self) -> RatFn:
        v = self.term()
        while self.peek().kind == "op" and self.peek().value in "+-":
            op = self.take().value
            rhs = self.term()
            v = v + rhs if op == "+" else v - rhs
        return v

    def term(self) -> RatFn:
        v = self.unary()
        while self.peek().kind == "op" and self.peek().value in "*/":
            tok = self.take()
            rhs = self.unary()
            if tok.value == "*":
                v = v * rhs
            else:
                if not rhs:
                    self.error("division by zero", tok)
                v = v / rhs
        return v

    def unary(self) -> RatFn:
        t = self.peek()
        if t.kind == "op" and t.value in "+-":
            self.take()
            v = self.unary()
            return -v if t.value == "-" else v
        return self.power()

    def power(self) -> RatFn:
        base = self.atom()
        if self.peek().kind == "op" and self.peek().value == "^":
            tok = self.take()
            e = self.unary()
            if not e.is_polynomial() or not e.num.is_constant():
                self.error("exponent must be an integer constant", tok)
            ev = e.num.constant_value()
            if not ev.is_rational() or ev.as_fraction().denominator != 1:
                self.error("exponent must be an integer constant", tok)
            k = int(ev.as_fraction())
            if k < 0 and not base:
                self.error("zero raised to a negative power", tok)
            return base ** k
        return base

    def atom(self) -> RatFn:
        t = self.take()
        if t.kind == "int":
            return RatFn(CoeffFn.const(Scalar.from_complex_parts(int(t.value))))
        if t.kind == "id":
            if t.value == "i":
                return RatFn(CoeffFn.const(I))
            if t.value == "pi":
                return RatFn(CoeffFn.const(PI))
            if self.symbols is not None and t.value not in self.symbols:
                self.error(f"undeclared symbol {t.value!r}", t)
            return RatFn(CoeffFn.sym(t.value))
        if t.kind == "op" and t.value == "(":
            v = self.expr()
            if self.peek().kind != "op" or self.peek().value != ")":
                self.error("expected ')'")
            self.take()
            return v
        if t.kind == "end":
            self.error("unexpected end of expression", t)
        self.error(f"unexpected token {t.value!r}", t)
        raise AssertionError  # unreachable


def parse_expr(text: str, symbols: Iterable[str] | None = None) -> RatFn:
    """Parse ``text`` into a RatFn; ``symbols`` restricts allowed identifiers."""
    if not isinstance(text, str):
        if isinstance(text, int) and not isinstance(text, bool):
            text = str(text)
        else:
            raise ExprSyntaxError(f"expected an expression string, got {type(text).__name__}", repr(text), 1)
    syms = frozenset(symbols) if symbols is not None else None
    return _Parser(text, syms).parse()


def parse_coeff(text: str, symbols: Iterable[str] | None = None) -> CoeffFn:
    v = parse_expr(text, symbols)
    if not v.is_polynomial():
        raise ExprSyntaxError("expected a polynomial (division by a non-constant)", str(text), 1)
    return v.num


def parse_scalar(text: str) -> Scalar:
    c = parse_coeff(text, ())
    return c.constant_value()


def parse_integer(text: str) -> int:
    s = parse_scalar(text)
    if not s.is_rational() or s.as_fraction().denominator != 1:
        raise ExprSyntaxError("expected an integer", str(text), 1)
    return int(s.as_fraction())


def scalar(text: str) -> Scalar:
    """Shorthand used throughout tests and built-ins."""
    return parse_scalar(text)

