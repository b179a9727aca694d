"""Canonical text form of polynomials: graded-lex descending, ASCII."""
from __future__ import annotations

from fractions import Fraction


def format_coefficient(c) -> str:
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def format_monomial(table, m: int) -> str:
    parts = []
    for name, e in zip(table.names, table.unpack(m)):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_term(table, m: int, c, first: bool) -> str:
    neg = c < 0
    a = -c if neg else c
    mono = format_monomial(table, m)
    if not mono:
        body = format_coefficient(a)
    elif a == 1:
        body = mono
    else:
        body = f"{format_coefficient(a)}*{mono}"
    if first:
        return "-" + body if neg else body
    return (" - " if neg else " + ") + body


def format_poly(p) -> str:
    if not p.terms:
        return "0"
    out = []
    for n, (m, c) in enumerate(p.sorted_terms()):
        out.append(format_term(p.table, m, c, n == 0))
    return "".join(out)


def format_value(v) -> str:
    """Polynomials print as themselves, rational functions as ``(num)/(den)``."""
    from .poly import Poly
    if isinstance(v, Poly):
        return format_poly(v)
    if v.den.is_constant() and v.den.constant_value() == 1:
        return format_poly(v.num)
    return f"({format_poly(v.num)})/({format_poly(v.den)})"
