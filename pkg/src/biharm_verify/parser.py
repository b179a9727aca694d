"""Text grammar for polynomials, rational functions and step expressions.

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | power
    power := atom ("^" INTEGER)?
    atom  := INTEGER | NAME | NAME "(" args ")" | "{" ID "}" | "(" expr ")"

A NAME is a declared base name followed by apostrophes for the jet order.
Juxtaposition is never multiplication.  Function calls and ``{ID}``
references only exist in step expressions.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .poly import MAX_DEGREE, ExponentOverflow, Poly, SymbolTable
from .printing import format_poly, format_value


class ParseError(ValueError):
    def __init__(self, msg: str, text: str = "", pos: int = 0, source: str = ""):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


class UnknownSymbol(ParseError):
    pass


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*'*)
  | (?P<ref>\{@?[A-Za-z0-9_.\-]+\})
  | (?P<op>[-+*/^(),;])
""", re.VERBOSE)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    pos: int


def tokenize(text: str, source: str = "") -> list[Tok]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos, source)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Tok(kind, m.group(), pos))
        pos = m.end()
    out.append(Tok("eof", "", len(text)))
    return out


# AST nodes are plain tuples: (tag, pos, ...)

class _Parser:
    def __init__(self, text: str, allow_calls: bool, source: str):
        self.text = text
        self.source = source
        self.toks = tokenize(text, source)
        self.i = 0
        self.allow_calls = allow_calls

    def error(self, msg, tok=None):
        tok = tok or self.toks[self.i]
        raise ParseError(msg, self.text, tok.pos, self.source)

    def peek(self) -> Tok:
        return self.toks[self.i]

    def take(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.peek()
        if t.text != text or t.kind not in ("op",):
            self.error(f"expected {text!r}" + (f", found {t.text!r}" if t.text else " before end of input"))
        return self.take()

    def parse_all(self):
        if self.peek().kind == "eof":
            self.error("empty expression")
        node = self.expr()
        t = self.peek()
        if t.kind != "eof":
            if t.kind in ("int", "name", "ref") or t.text == "(":
                self.error("implicit multiplication is not allowed; use '*'")
            self.error(f"unexpected {t.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            t = self.take()
            node = ("bin", t.pos, t.text, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek().text in ("*", "/") and self.peek().kind == "op":
            t = self.take()
            node = ("bin", t.pos, t.text, node, self.unary())
        return node

    def unary(self):
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.take()
            return ("neg", t.pos, self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        t = self.peek()
        if t.kind == "op" and t.text == "^":
            self.take()
            e = self.peek()
            if e.kind != "int":
                self.error("'^' needs a nonnegative integer literal")
            self.take()
            n = int(e.text)
            if n > MAX_DEGREE:
                raise ExponentOverflow(f"{self.source + ':' if self.source else ''}exponent {n} exceeds {MAX_DEGREE}")
            node = ("pow", t.pos, node, n)
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "^":
                self.error("chained '^' is ambiguous; add parentheses")
        return node

    def atom(self):
        t = self.peek()
        if t.kind == "int":
            self.take()
            return ("num", t.pos, int(t.text))
        if t.kind == "name":
            self.take()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "(":
                if not self.allow_calls:
                    self.error("function calls are only allowed in step expressions", t)
                self.take()
                args = []
                if not (self.peek().kind == "op" and self.peek().text == ")"):
                    args.append(self.expr())
                    while self.peek().kind == "op" and self.peek().text == ",":
                        self.take()
                        args.append(self.expr())
                self.expect(")")
                return ("call", t.pos, t.text, args)
            return ("var", t.pos, t.text)
        if t.kind == "ref":
            if not self.allow_calls:
                self.error("references are only allowed in step expressions")
            self.take()
            return ("ref", t.pos, t.text[1:-1])
        if t.kind == "op" and t.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "eof":
            self.error("unexpected end of input")
        self.error(f"unexpected {t.text!r}")


def parse_ast(text: str, allow_calls: bool = False, source: str = ""):
    return _Parser(text, allow_calls, source).parse_all()


class Evaluator:
    """Folds an AST into Poly / RatFunc values.

    ``division`` is one of "constant" (divisor must be a nonzero constant)
    or "rational" (any nonzero divisor, producing RatFunc values).
    """

    def __init__(self, table: SymbolTable, division: str = "constant",
                 ref: Callable | None = None, call: Callable | None = None,
                 text: str = "", source: str = ""):
        self.table = table
        self.division = division
        self.ref = ref
        self.call = call
        self.text = text
        self.source = source

    def fail(self, msg, pos, cls=ParseError):
        raise cls(msg, self.text, pos, self.source)

    def eval(self, node):
        tag = node[0]
        if tag == "num":
            return Poly.const(self.table, node[2])
        if tag == "var":
            name = node[2]
            if name not in self.table.index:
                self.fail(f"unknown symbol {name!r}", node[1], UnknownSymbol)
            return self.table.var(name)
        if tag == "ref":
            return self.ref(node[2], node[1])
        if tag == "call":
            return self.call(node[2], node[3], node[1], self)
        if tag == "neg":
            return -self.eval(node[2])
        if tag == "pow":
            return self.eval(node[2]) ** node[3]
        if tag == "bin":
            op = node[2]
            a = self.eval(node[3])
            b = self.eval(node[4])
            if op == "+":
                return _add(a, b)
            if op == "-":
                return _add(a, -b)
            if op == "*":
                return _mul(a, b)
            return self.divide(a, b, node[1])
        raise AssertionError(tag)

    def divide(self, a, b, pos):
        from .diffring import RatFunc
        if isinstance(b, Poly) and b.is_constant():
            if b.is_zero():
                self.fail("division by zero", pos)
            c = Fraction(1) / Fraction(b.constant_value())
            return a.scale(c) if isinstance(a, Poly) else a * Poly.const(self.table, c)
        if self.division != "rational":
            self.fail("division by a non-constant is only allowed in rule and .rat files", pos)
        if (isinstance(b, RatFunc) and b.is_zero()) or (isinstance(b, Poly) and b.is_zero()):
            self.fail("division by zero", pos)
        r = RatFunc.lift(a) / RatFunc.lift(b)
        return r.simplify()


def _add(a, b):
    if isinstance(a, Poly) and not isinstance(b, Poly):
        return b + a
    return a + b


def _mul(a, b):
    if isinstance(a, Poly) and not isinstance(b, Poly):
        return b * a
    return a * b


def split_equation(text: str) -> tuple[str, str | None]:
    if text.count("=") > 1:
        raise ParseError("more than one '=' in equation", text, text.index("=", text.index("=") + 1))
    if "=" in text:
        lhs, rhs = text.split("=")
        return lhs, rhs
    return text, None


def parse_poly(text: str, table: SymbolTable, source: str = "") -> Poly:
    """Parse a polynomial; ``/`` is accepted only with a constant divisor."""
    v = Evaluator(table, "constant", text=text, source=source).eval(parse_ast(text, source=source))
    return v


def parse_value(text: str, table: SymbolTable, source: str = ""):
    """Parse a polynomial or rational function (division by polynomials allowed)."""
    return Evaluator(table, "rational", text=text, source=source).eval(parse_ast(text, source=source))


def parse_equation(text: str, table: SymbolTable, rational: bool = False, source: str = ""):
    """``lhs = rhs`` becomes ``lhs - rhs``; a bare expression is taken as ``expr = 0``."""
    lhs, rhs = split_equation(text)
    parse = parse_value if rational else parse_poly
    left = parse(lhs, table, source)
    if rhs is None:
        return left
    offset = len(lhs) + 1
    try:
        right = parse(rhs, table, source)
    except ParseError as exc:
        # re-anchor the position to the full text
        raise type(exc)(exc.msg, text, offset + _pos_in(rhs, exc), source) from None
    return _add(left, -right)


def _pos_in(text: str, exc: ParseError) -> int:
    lines = text.split("\n")
    return sum(len(l) + 1 for l in lines[: exc.line - 1]) + exc.col - 1


def print_canonical(p) -> str:
    if isinstance(p, Poly):
        return format_poly(p)
    return format_value(p)
