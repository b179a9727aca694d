"""Rational functions and a formal derivation acting on jet and auxiliary variables."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import limits
from .poly import NotDivisible, Poly, SymbolTable, divide_exact


class UnruledVariable(KeyError):
    pass


class RatFunc:
    """``num / den`` with ``den`` primitive and positive-leading.

    No gcd cancellation is attempted beyond cheap exact-division shortcuts,
    so two equal rational functions may have different representations;
    use ``==`` (cross-multiplication) to compare.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None):
        if den is None:
            den = Poly.const(num.table, 1)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if len(den.terms) == 1 and den.terms.get(0) == 1:
            self.num, self.den = num, den
            return
        content, prim = den.content_and_primitive()
        if content != 1:
            num = num.scale(Fraction(1) / Fraction(content))
        self.num = num
        self.den = prim

    @classmethod
    def lift(cls, v) -> "RatFunc":
        if isinstance(v, RatFunc):
            return v
        if isinstance(v, Poly):
            return cls(v)
        raise TypeError(f"cannot lift {type(v).__name__} to RatFunc")

    @property
    def table(self) -> SymbolTable:
        return self.num.table

    def is_poly(self) -> bool:
        return self.den.is_constant()

    def to_poly(self) -> Poly:
        """Exact polynomial value; raises NotDivisible if the denominator does not cancel."""
        if self.den.is_constant():
            return self.num
        return divide_exact(self.num, self.den)

    def simplify(self) -> "RatFunc | Poly":
        if self.den.is_constant():
            return self.num
        if self.num.is_zero():
            return Poly.zero(self.table)
        try:
            return divide_exact(self.num, self.den)
        except NotDivisible:
            return self

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def _coerce(self, other):
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, Poly):
            return RatFunc(other)
        if isinstance(other, (int, Fraction)):
            return RatFunc(Poly.const(self.table, other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        # cheap common denominator when one divides the other
        for big, small, bn, sn in ((self.den, other.den, self.num, other.num),
                                   (other.den, self.den, other.num, self.num)):
            if small.is_constant():
                return RatFunc(bn + sn * big, big)
            if len(small) <= len(big):
                try:
                    q = divide_exact(big, small)
                except NotDivisible:
                    continue
                return RatFunc(bn + sn * q, big)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

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

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.num.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("integer exponent required")
        if n < 0:
            return RatFunc(Poly.const(self.table, 1)) / (self ** -n)
        return RatFunc(self.num ** n, self.den ** n)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        raise TypeError("RatFunc is not hashable; compare with ==")

    def __repr__(self):
        from .printing import format_value
        return format_value(self)


def as_ratfunc(v) -> RatFunc:
    return RatFunc.lift(v)


@dataclass(frozen=True)
class Derivation:
    """Formal derivation: explicit rules first, then the jet order shift."""

    table: SymbolTable
    rules: Mapping[int, RatFunc] = field(default_factory=dict)
    jets: bool = True
    name: str = ""

    @classmethod
    def from_rules(cls, table: SymbolTable, rules: Mapping, jets: bool = True, name: str = "") -> "Derivation":
        resolved = {}
        for k, v in rules.items():
            resolved[table.resolve(k)] = RatFunc.lift(v)
        return cls(table, resolved, jets, name)

    def rule(self, i: int) -> RatFunc:
        r = self.rules.get(i)
        if r is not None:
            return r
        if self.jets:
            nxt = self.table.jet_successor(i)
            if nxt is not None:
                return RatFunc(self.table.var(nxt))
        raise UnruledVariable(f"no derivation rule for {self.table.names[i]!r}")

    def has_rule(self, i: int) -> bool:
        try:
            self.rule(i)
        except UnruledVariable:
            return False
        return True


def derive(p, d: Derivation):
    """Apply the derivation; polynomial results come back as Poly, others as RatFunc."""
    if isinstance(p, RatFunc):
        if p.den.is_constant():
            return derive(p.num, d)
        dn = as_ratfunc(derive(p.num, d))
        dd = as_ratfunc(derive(p.den, d))
        return _settle((dn * RatFunc(p.den) - RatFunc(p.num) * dd) / RatFunc(p.den ** 2))
    total_poly = Poly.zero(p.table)
    total_rat = None
    for i in sorted(p.variables()):
        part = p.partial(i)
        r = d.rule(i)
        limits.check_time()
        if r.den.is_constant():
            total_poly = total_poly + part * r.num
        else:
            term = RatFunc(part * r.num, r.den)
            total_rat = term if total_rat is None else total_rat + term
    if total_rat is None:
        return total_poly
    return _settle(total_rat + total_poly)


def _settle(r: RatFunc):
    return r.num if r.den.is_constant() else r


def clear_denominators(r, ledger: list | None = None) -> Poly:
    """Primitive part of the numerator; the denominator is appended to ``ledger``."""
    r = as_ratfunc(r)
    if ledger is not None and not r.den.is_constant():
        ledger.append(r.den)
    if r.num.is_zero():
        return r.num
    return r.num.primitive()


def substitute(p, v, r):
    """Replace variable ``v`` by ``r`` (Poly or RatFunc) inside ``p`` (Poly or RatFunc)."""
    if isinstance(p, RatFunc):
        n = as_ratfunc(substitute(p.num, v, r))
        dd = as_ratfunc(substitute(p.den, v, r))
        return _settle(n / dd)
    table = p.table
    i = table.resolve(v)
    coeffs = p.as_univariate(i)
    if set(coeffs) <= {0}:
        return p
    if isinstance(r, Poly) or (isinstance(r, RatFunc) and r.den.is_constant()):
        rp = r if isinstance(r, Poly) else r.num
        return _horner(coeffs, rp, Poly.const(table, 1))
    d = max(coeffs)
    num = _horner(coeffs, r.num, r.den)
    return _settle(RatFunc(num, r.den ** d))


def _horner(coeffs: Mapping[int, Poly], num: Poly, den: Poly) -> Poly:
    """Sum of c_k * num^k * den^(d-k) over the univariate coefficient map."""
    d = max(coeffs)
    table = num.table
    den_is_one = den.is_constant() and den.constant_value() == 1
    den_pow = Poly.const(table, 1)
    acc = Poly.zero(table)
    for k in range(d, -1, -1):
        if k != d:
            acc = acc * num
            if not den_is_one:
                den_pow = den_pow * den
        c = coeffs.get(k)
        if c is not None:
            acc = acc + (c if den_is_one else c * den_pow)
        limits.check_time()
    return acc
