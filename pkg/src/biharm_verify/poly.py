"""Sparse multivariate polynomials with exact rational coefficients.

A monomial is packed into one Python int: a 16-bit field per variable, the
first declared variable in the most significant field, and the total degree
above all of them.  Multiplying monomials is then integer addition, and
comparing the packed ints compares monomials in graded lexicographic order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

from . import limits

EXP_BITS = 16
EXP_MASK = (1 << EXP_BITS) - 1
MAX_DEGREE = EXP_MASK


class SymbolTableMismatch(ValueError):
    pass


class ExponentOverflow(ValueError):
    pass


class NotDivisible(ArithmeticError):
    pass


def _rat(c) -> Rational:
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, Rational):
        return _rat(Fraction(c.numerator, c.denominator))
    raise TypeError(f"not an exact rational: {c!r}")


@dataclass(frozen=True)
class Symbol:
    base: str
    order: int = 0
    role: str = "base"  # base | jet | auxiliary
    note: str = ""

    @property
    def name(self) -> str:
        return self.base + "'" * self.order


class SymbolTable:
    """Ordered variable inventory; declaration order fixes the monomial order."""

    def __init__(self, symbols: Iterable[Symbol]):
        self.symbols = tuple(symbols)
        self.names = tuple(s.name for s in self.symbols)
        self.index = {}
        for i, name in enumerate(self.names):
            if name in self.index:
                raise ValueError(f"duplicate symbol {name!r}")
            self.index[name] = i
        self.n = len(self.symbols)
        self._shift = tuple(EXP_BITS * (self.n - 1 - i) for i in range(self.n))
        self._deg_shift = EXP_BITS * self.n
        self._unit = tuple(self.pack_var(i) for i in range(self.n))

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "SymbolTable":
        syms = []
        for name in names:
            base = name.rstrip("'")
            syms.append(Symbol(base, len(name) - len(base), "jet" if name != base else "base"))
        return cls(syms)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        return isinstance(other, SymbolTable) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        return f"SymbolTable({list(self.names)})"

    def resolve(self, v) -> int:
        if isinstance(v, int):
            if not 0 <= v < self.n:
                raise IndexError(v)
            return v
        if isinstance(v, Poly):
            v = v.as_variable()
            return v
        try:
            return self.index[v]
        except KeyError:
            raise KeyError(f"unknown symbol {v!r}") from None

    def jet_successor(self, i: int) -> int | None:
        sym = self.symbols[i]
        return self.index.get(sym.base + "'" * (sym.order + 1))

    # monomial packing

    def pack_var(self, i: int, e: int = 1) -> int:
        return (e << self._deg_shift) | (e << self._shift[i])

    def pack(self, exps: Mapping[int, int] | Iterable[int]) -> int:
        if not isinstance(exps, Mapping):
            exps = dict(enumerate(exps))
        m = 0
        deg = 0
        for i, e in exps.items():
            if e < 0 or e > MAX_DEGREE:
                raise ExponentOverflow(f"exponent {e} out of range")
            m |= e << self._shift[i]
            deg += e
        if deg > MAX_DEGREE:
            raise ExponentOverflow(f"total degree {deg} out of range")
        return m | (deg << self._deg_shift)

    def unpack(self, m: int) -> tuple[int, ...]:
        return tuple((m >> s) & EXP_MASK for s in self._shift)

    def exponent(self, m: int, i: int) -> int:
        return (m >> self._shift[i]) & EXP_MASK

    def degree_of(self, m: int) -> int:
        return m >> self._deg_shift

    def var(self, v) -> "Poly":
        return Poly(self, {self._unit[self.resolve(v)]: 1})


class Poly:
    """Immutable polynomial; ``terms`` maps packed monomials to nonzero rationals."""

    __slots__ = ("table", "terms", "_hash")

    def __init__(self, table: SymbolTable, terms: Mapping[int, Rational] | None = None,
                 *, _trusted: bool = False):
        self.table = table
        if _trusted:
            self.terms = terms
        else:
            self.terms = {m: _rat(c) for m, c in (terms or {}).items() if c}
        self._hash = None

    # constructors

    @classmethod
    def zero(cls, table: SymbolTable) -> "Poly":
        return cls(table, {}, _trusted=True)

    @classmethod
    def const(cls, table: SymbolTable, c) -> "Poly":
        c = _rat(c)
        return cls(table, {0: c} if c else {}, _trusted=True)

    @classmethod
    def var(cls, table: SymbolTable, v) -> "Poly":
        return table.var(v)

    @classmethod
    def from_exponents(cls, table: SymbolTable, items: Iterable[tuple[Mapping[str, int], Rational]]) -> "Poly":
        terms: dict[int, Rational] = {}
        for exps, c in items:
            m = table.pack({table.resolve(k): e for k, e in exps.items()})
            terms[m] = terms.get(m, 0) + _rat(c)
        return cls(table, terms)

    # basic queries

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def constant_value(self) -> Rational:
        if not self.is_constant():
            raise ValueError("not a constant polynomial")
        return self.terms.get(0, 0)

    def __len__(self):
        return len(self.terms)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return self.table.degree_of(max(self.terms))

    def degree_in(self, v) -> int:
        i = self.table.resolve(v)
        if not self.terms:
            return -1
        return max(self.table.exponent(m, i) for m in self.terms)

    def variables(self) -> set[int]:
        out = set()
        for m in self.terms:
            for i, e in enumerate(self.table.unpack(m)):
                if e:
                    out.add(i)
        return out

    def variable_names(self) -> list[str]:
        return [self.table.names[i] for i in sorted(self.variables())]

    def occurs(self, v) -> bool:
        i = self.table.resolve(v)
        return any(self.table.exponent(m, i) for m in self.terms)

    def as_variable(self) -> int:
        if len(self.terms) == 1:
            (m, c), = self.terms.items()
            if c == 1 and self.table.degree_of(m) == 1:
                return self.table.unpack(m).index(1)
        raise ValueError(f"{self} is not a single variable")

    def leading(self) -> tuple[int, Rational]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        m = max(self.terms)
        return m, self.terms[m]

    def leading_coefficient(self) -> Rational:
        return self.leading()[1]

    def sorted_terms(self) -> list[tuple[int, Rational]]:
        return sorted(self.terms.items(), reverse=True)

    # equality

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.table == other.table and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == ({0: other} if other else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # arithmetic

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.table is not self.table and other.table != self.table:
                raise SymbolTableMismatch("polynomials over different symbol tables")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(self.table, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(other.terms) > len(self.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        res = dict(a)
        for m, c in b.items():
            s = res.get(m, 0) + c
            if s:
                res[m] = s
            else:
                res.pop(m, None)
        limits.check_terms(len(res))
        return Poly(self.table, res, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.table, {m: -c for m, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def scale(self, c) -> "Poly":
        c = _rat(c)
        if not c:
            return Poly.zero(self.table)
        if c == 1:
            return self
        return Poly(self.table, {m: _rat(v * c) for m, v in self.terms.items()}, _trusted=True)

    def mul_monomial(self, m0: int, c=1) -> "Poly":
        if self.terms and self.table.degree_of(max(self.terms)) + self.table.degree_of(m0) > MAX_DEGREE:
            raise ExponentOverflow("total degree out of range")
        return Poly(self.table, {m + m0: v * c for m, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.terms or not other.terms:
            return Poly.zero(self.table)
        if self.degree() + other.degree() > MAX_DEGREE:
            raise ExponentOverflow("total degree out of range")
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            (m0, c0), = b.items()
            return Poly(self.table, {m + m0: c * c0 for m, c in a.items()}, _trusted=True)
        res: dict[int, Rational] = {}
        get = res.get
        b_items = list(b.items())
        cap_check = limits.check_terms
        for n, (m1, c1) in enumerate(a.items()):
            for m2, c2 in b_items:
                m = m1 + m2
                res[m] = get(m, 0) + c1 * c2
            if n & 63 == 63:
                cap_check(len(res))
                limits.check_time()
        res = {m: c for m, c in res.items() if c}
        cap_check(len(res))
        return Poly(self.table, res, _trusted=True)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Poly.const(self.table, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # structure

    def coeff_in(self, v, k: int) -> "Poly":
        """Coefficient of ``v**k`` when ``self`` is viewed as univariate in ``v``."""
        i = self.table.resolve(v)
        t = self.table
        strip = t.pack_var(i, k)
        res = {}
        for m, c in self.terms.items():
            if t.exponent(m, i) == k:
                res[m - strip] = c
        return Poly(t, res, _trusted=True)

    def as_univariate(self, v) -> dict[int, "Poly"]:
        i = self.table.resolve(v)
        t = self.table
        buckets: dict[int, dict[int, Rational]] = {}
        for m, c in self.terms.items():
            e = t.exponent(m, i)
            buckets.setdefault(e, {})[m - t.pack_var(i, e)] = c
        return {e: Poly(t, d, _trusted=True) for e, d in buckets.items()}

    @classmethod
    def from_univariate(cls, table: SymbolTable, v, coeffs: Mapping[int, "Poly"]) -> "Poly":
        x = table.var(v)
        out = Poly.zero(table)
        for k, c in coeffs.items():
            out = out + c * x ** k
        return out

    def partial(self, v) -> "Poly":
        """Formal partial derivative with respect to ``v``."""
        i = self.table.resolve(v)
        t = self.table
        one = t.pack_var(i)
        res = {}
        for m, c in self.terms.items():
            e = t.exponent(m, i)
            if e:
                res[m - one] = c * e
        return Poly(t, res, _trusted=True)

    def deflate(self, v, g: int) -> "Poly":
        """Replace ``v**(g*j)`` by ``v**j``; every exponent of ``v`` must be a multiple of ``g``."""
        i = self.table.resolve(v)
        t = self.table
        res = {}
        for m, c in self.terms.items():
            e = t.exponent(m, i)
            if e % g:
                raise ValueError(f"exponent {e} of {t.names[i]} not divisible by {g}")
            res[m - t.pack_var(i, e) + t.pack_var(i, e // g)] = c
        return Poly(t, res, _trusted=True)

    def exponent_gcd(self, v) -> int:
        i = self.table.resolve(v)
        g = 0
        for m in self.terms:
            g = math.gcd(g, self.table.exponent(m, i))
        return g

    def monomial_gcd(self) -> int:
        """Packed monomial dividing every term (the zero monomial if none)."""
        if not self.terms:
            return 0
        it = iter(self.terms)
        low = list(self.table.unpack(next(it)))
        for m in it:
            for j, e in enumerate(self.table.unpack(m)):
                if e < low[j]:
                    low[j] = e
        return self.table.pack(low)

    def content_and_primitive(self) -> tuple[Rational, "Poly"]:
        """Split into ``content * primitive``.

        The primitive part has coprime integer coefficients and a positive
        leading coefficient in graded-lex order.
        """
        if not self.terms:
            raise ValueError("content of the zero polynomial is undefined")
        den = 1
        for c in self.terms.values():
            if isinstance(c, Fraction):
                den = den * c.denominator // math.gcd(den, c.denominator)
        num_gcd = 0
        for c in self.terms.values():
            num_gcd = math.gcd(num_gcd, int(c * den))
        content = Fraction(num_gcd, den)
        if self.leading_coefficient() < 0:
            content = -content
        if content == 1:
            return 1, self
        prim = {m: _rat(c / content) for m, c in self.terms.items()}
        return _rat(content), Poly(self.table, prim, _trusted=True)

    def primitive(self) -> "Poly":
        return self.content_and_primitive()[1]

    def evaluate(self, assignment: Mapping) -> Rational:
        values = {}
        for k, val in assignment.items():
            values[self.table.resolve(k)] = Fraction(val)
        needed = self.variables()
        missing = needed - values.keys()
        if missing:
            raise KeyError("missing value for " + ", ".join(self.table.names[i] for i in sorted(missing)))
        total = Fraction(0)
        for m, c in self.terms.items():
            term = Fraction(c)
            for i, e in enumerate(self.table.unpack(m)):
                if e:
                    term *= values[i] ** e
            total += term
        return _rat(total)

    def __repr__(self):
        from .printing import format_poly
        return format_poly(self)

    __str__ = __repr__


def add(a: Poly, b: Poly) -> Poly:
    return a + b


def mul(a: Poly, b: Poly) -> Poly:
    return a * b


def pow(a: Poly, n: int) -> Poly:  # noqa: A001 - mirrors the operation name
    return a ** n


def coeff_in(p: Poly, v, k: int) -> Poly:
    return p.coeff_in(v, k)


def content_and_primitive(p: Poly) -> tuple[Rational, Poly]:
    return p.content_and_primitive()


def evaluate(p: Poly, assignment: Mapping) -> Rational:
    return p.evaluate(assignment)


def equal_up_to_scalar(a: Poly, b: Poly) -> Rational | None:
    """Return ``c != 0`` with ``a == c*b``, or None if no such scalar exists."""
    if a.table != b.table:
        raise SymbolTableMismatch("polynomials over different symbol tables")
    if not a.terms or not b.terms:
        return 1 if not a.terms and not b.terms else None
    if len(a.terms) != len(b.terms):
        return None
    m, ca = a.leading()
    cb = b.terms.get(m)
    if cb is None:
        return None
    c = Fraction(ca) / Fraction(cb)
    for m, v in b.terms.items():
        if a.terms.get(m) != v * c:
            return None
    return _rat(c)


def divide_exact(a: Poly, b: Poly) -> Poly:
    """Quotient ``a / b``; raises NotDivisible when ``b`` does not divide ``a``."""
    if not b.terms:
        raise ZeroDivisionError("division by the zero polynomial")
    t = a.table
    if b.is_constant():
        return a.scale(Fraction(1) / Fraction(b.constant_value()))
    mb, cb = b.leading()
    eb = t.unpack(mb)
    cb = Fraction(cb)
    rem = dict(a.terms)
    quot: dict[int, Rational] = {}
    b_items = list(b.terms.items())
    steps = 0
    while rem:
        m = max(rem)
        em = t.unpack(m)
        if any(x < y for x, y in zip(em, eb)):
            raise NotDivisible(f"{b} does not divide the dividend")
        q_m = m - mb
        q_c = _rat(Fraction(rem[m]) / cb)
        quot[q_m] = q_c
        for mm, cc in b_items:
            key = mm + q_m
            s = rem.get(key, 0) - cc * q_c
            if s:
                rem[key] = s
            else:
                rem.pop(key, None)
        steps += 1
        if steps & 255 == 0:
            limits.check_time()
            limits.check_terms(len(rem))
    return Poly(t, {m: _rat(c) for m, c in quot.items()}, _trusted=True)


def divides(b: Poly, a: Poly) -> bool:
    try:
        divide_exact(a, b)
    except NotDivisible:
        return False
    return True
