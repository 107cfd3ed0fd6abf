"""Recursive-descent parser for field, module and variety literals.

One grammar serves three rings: K = F_q(t), the twisted ring K{tau} and
K[X1..Xg].  The ring decides which symbols exist and what products mean.

    expr   := ['-'] term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := atom ['^' INT]
    atom   := INT | NAME | '(' expr ')'

Names are t, g (a generator of F_q when q is not prime), tau and X1..Xg.
Juxtaposition is not multiplication: write 2*t, not 2t.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

from .algebra import GF, FqPoly, RatFunc, get_field
from .mordell import MPoly
from .twisted import TwistedPoly

MAX_EXPONENT = 4096


class ParseError(ValueError):
    """Syntax or domain error at a 1-based line and column."""

    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # INT, NAME, OP, END
    text: str
    line: int
    col: int


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|([-+*/^(),]))")


def tokenize(text: str, line: int = 1, col: int = 1) -> list[Token]:
    """Split one expression into tokens; col is the column of text[0]."""
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            skip = len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[pos + skip]!r}", line, col + pos + skip)
        start = m.start(m.lastindex)
        kind = ("INT", "NAME", "OP")[m.lastindex - 1]
        out.append(Token(kind, m.group(m.lastindex), line, col + start))
        pos = m.end()
    out.append(Token("END", "", line, col + len(text.rstrip())))
    return out


class Ring:
    """Adapter describing one target ring for the parser."""

    def __init__(self, F: GF):
        self.F = F

    def from_int(self, n: int):
        raise NotImplementedError

    def symbol(self, name: str):
        """Value of a name, or None if the ring does not know it."""
        raise NotImplementedError

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def as_const(self, a) -> RatFunc | None:
        """a as an element of K when it is one, else None."""
        raise NotImplementedError

    def from_const(self, c: RatFunc):
        raise NotImplementedError

    def power(self, a, e: int):
        result = self.from_int(1)
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result


def _int_const(F: GF, n: int) -> RatFunc:
    return RatFunc.from_poly(FqPoly(F, [n % F.p]))


def _field_symbol(F: GF, name: str) -> RatFunc | None:
    if name == "t":
        return RatFunc.t(F)
    if name == "g" and not F.prime:
        return RatFunc.from_poly(FqPoly(F, [F.generator]))
    return None


class KRing(Ring):
    """K = F_q(t)."""

    def from_int(self, n):
        return _int_const(self.F, n)

    def symbol(self, name):
        return _field_symbol(self.F, name)

    def as_const(self, a):
        return a

    def from_const(self, c):
        return c


class PrimePolyRing(Ring):
    """F_p[g], used for the conductor of an extension field."""

    def from_int(self, n):
        return FqPoly(self.F, [n % self.F.p])

    def symbol(self, name):
        return self.F.t if name == "g" else None

    def as_const(self, a):
        return None

    def from_const(self, c):
        raise TypeError


class TwistedRing(Ring):
    """K{tau}; products are compositions, so tau * t = t^q * tau."""

    def from_int(self, n):
        return TwistedPoly.constant(_int_const(self.F, n))

    def symbol(self, name):
        if name == "tau":
            return TwistedPoly.tau(self.F)
        c = _field_symbol(self.F, name)
        return None if c is None else TwistedPoly.constant(c)

    def as_const(self, a):
        if a.degree <= 0:
            return a[0]
        return None

    def from_const(self, c):
        return TwistedPoly.constant(c)


class MPolyRing(Ring):
    """K[X1..Xg]."""

    def __init__(self, F: GF, g: int):
        super().__init__(F)
        self.g = g

    def from_int(self, n):
        return MPoly.const(self.F, self.g, _int_const(self.F, n))

    def symbol(self, name):
        m = re.fullmatch(r"X(\d+)", name)
        if m:
            i = int(m.group(1))
            if not 1 <= i <= self.g:
                return None
            return MPoly.var(self.F, self.g, i - 1)
        c = _field_symbol(self.F, name)
        return None if c is None else MPoly.const(self.F, self.g, c)

    def as_const(self, a):
        if all(not any(mono) for mono in a.terms):
            return a.terms.get((0,) * self.g, RatFunc.zero(self.F))
        return None

    def from_const(self, c):
        return MPoly.const(self.F, self.g, c)


class _Parser:
    def __init__(self, ring: Ring, tokens: list[Token]):
        self.ring = ring
        self.toks = tokens
        self.i = 0

    def peek(self) -> Token:
        return self.toks[self.i]

    def take(self) -> Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind != "OP":
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return self.take()

    def error(self, tok: Token, message: str):
        raise ParseError(message, tok.line, tok.col)

    def expr(self):
        ring = self.ring
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "-":
            self.take()
            value = ring.neg(self.term())
        else:
            value = self.term()
        while self.peek().kind == "OP" and self.peek().text in "+-":
            op = self.take().text
            rhs = self.term()
            value = ring.add(value, rhs if op == "+" else ring.neg(rhs))
        return value

    def term(self):
        ring = self.ring
        value = self.factor()
        while self.peek().kind == "OP" and self.peek().text in "*/":
            op = self.take()
            rhs_tok = self.peek()
            rhs = self.factor()
            if op.text == "*":
                value = ring.mul(value, rhs)
                continue
            c = ring.as_const(rhs)
            if c is None:
                self.error(rhs_tok, "division is only allowed by elements of K")
            if c.is_zero():
                self.error(rhs_tok, "division by zero")
            lhs = ring.as_const(value)
            if lhs is not None:
                value = ring.from_const(lhs / c)
            else:
                value = ring.mul(ring.from_const(c.inverse()), value)
        return value

    def factor(self):
        base = self.atom()
        if self.peek().kind == "OP" and self.peek().text == "^":
            self.take()
            neg = False
            if self.peek().kind == "OP" and self.peek().text == "-":
                neg = True
                self.take()
            tok = self.take()
            if tok.kind != "INT":
                self.error(tok, "exponent must be a non-negative integer literal" if not neg else "exponent must be an integer literal")
            e = int(tok.text)
            if e > MAX_EXPONENT:
                self.error(tok, f"exponent exceeds {MAX_EXPONENT}")
            if neg:
                c = self.ring.as_const(base)
                if c is None or c.is_zero():
                    self.error(tok, "negative powers need a nonzero element of K")
                return self.ring.from_const(c.inverse() ** e)
            base = self.ring.power(base, e)
        return base

    def atom(self):
        tok = self.take()
        if tok.kind == "INT":
            return self.ring.from_int(int(tok.text))
        if tok.kind == "NAME":
            value = self.ring.symbol(tok.text)
            if value is None:
                self.error(tok, f"unknown symbol {tok.text!r}")
            return value
        if tok.kind == "OP" and tok.text == "(":
            value = self.expr()
            self.expect(")")
            return value
        self.error(tok, f"unexpected {tok.text or 'end of input'!r}")


def parse_with(ring: Ring, text: str, line: int = 1, col: int = 1):
    """Parse a complete expression in the given ring."""
    p = _Parser(ring, tokenize(text, line, col))
    value = p.expr()
    end = p.peek()
    if end.kind != "END":
        p.error(end, f"unexpected {end.text!r}")
    return value


def parse_list(ring: Ring, text: str, line: int = 1, col: int = 1) -> list[Any]:
    """Comma-separated expressions; commas inside parentheses do not split."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append((start, text[start:i]))
            start = i + 1
    parts.append((start, text[start:]))
    out = []
    for off, chunk in parts:
        if not chunk.strip():
            raise ParseError("empty list entry", line, col + off)
        out.append(parse_with(ring, chunk, line, col + off))
    return out


def parse_ratfunc(F: GF, text: str, line: int = 1, col: int = 1) -> RatFunc:
    return parse_with(KRing(F), text, line, col)


def parse_poly(F: GF, text: str, line: int = 1, col: int = 1) -> FqPoly:
    """A polynomial in t; rejects genuine fractions."""
    x = parse_ratfunc(F, text, line, col)
    if not x.is_poly():
        raise ParseError(f"{x} is not a polynomial", line, col)
    return x.num


def parse_twisted(F: GF, text: str, line: int = 1, col: int = 1) -> TwistedPoly:
    return parse_with(TwistedRing(F), text, line, col)


def parse_mpoly(F: GF, g: int, text: str, line: int = 1, col: int = 1):
    return parse_with(MPolyRing(F, g), text, line, col)


def parse_conductor(p: int, text: str, line: int = 1, col: int = 1) -> tuple[int, ...]:
    """Conductor written as a polynomial in g over F_p, e.g. g^2 + g + 1."""
    f = parse_with(PrimePolyRing(get_field(p)), text, line, col)
    return tuple(int(c) for c in f.coeffs())

