"""Sturm sequences and exact real-root counting over the rationals."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .poly import Poly


class UniPoly:
    """Dense univariate polynomial, coefficients lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def from_poly(cls, p: Poly, v=None) -> "UniPoly":
        vars_ = p.variables()
        if v is None:
            if len(vars_) > 1:
                raise ValueError("polynomial is not univariate: " + ", ".join(p.variable_names()))
            if not vars_:
                return cls([p.constant_value()])
            v = next(iter(vars_))
        vi = p.table.resolve(v)
        if vars_ - {vi}:
            raise ValueError("polynomial has other variables besides " + p.table.names[vi])
        out = [Fraction(0)] * (p.degree_in(vi) + 1 if p else 1)
        for m, c in p.terms.items():
            out[p.table.exponent(m, vi)] = Fraction(c)
        return cls(out)

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def lc(self) -> Fraction:
        return self.coeffs[-1]

    def __call__(self, x) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other):
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"UniPoly({[str(c) for c in self.coeffs]})"

    def __mul__(self, other: "UniPoly") -> "UniPoly":
        if self.is_zero() or other.is_zero():
            return UniPoly([])
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPoly(out)

    def derivative(self) -> "UniPoly":
        return UniPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        d = other.degree
        lc = other.lc()
        q = [Fraction(0)] * max(len(r) - d, 0)
        while len(r) - 1 >= d and r:
            f = r[-1] / lc
            shift = len(r) - 1 - d
            q[shift] = f
            for i, c in enumerate(other.coeffs):
                r[shift + i] -= f * c
            r.pop()
            while r and r[-1] == 0:
                r.pop()
        return UniPoly(q), UniPoly(r)

    def rem(self, other: "UniPoly") -> "UniPoly":
        return self.divmod(other)[1]

    def square_free(self) -> "UniPoly":
        """``p / gcd(p, p')``: same distinct roots, all simple."""
        if self.degree < 1:
            return self
        a, b = self, self.derivative()
        while not b.is_zero():
            a, b = b, a.rem(b)
        if a.degree == 0:
            return self
        return self.divmod(a)[0]

    def positive_normalize(self) -> "UniPoly":
        """Divide by the positive content; signs are preserved."""
        if self.is_zero():
            return self
        den = 1
        for c in self.coeffs:
            den = den * c.denominator // math.gcd(den, c.denominator)
        g = 0
        for c in self.coeffs:
            g = math.gcd(g, int(c * den))
        scale = Fraction(den, g)
        return UniPoly([c * scale for c in self.coeffs])


def sturm_sequence(p: UniPoly) -> list[UniPoly]:
    """Sturm chain of the square-free part, so repeated roots at interval ends count correctly."""
    if p.is_zero():
        raise ValueError("Sturm sequence of the zero polynomial")
    p = p.square_free()
    seq = [p.positive_normalize()]
    if p.degree == 0:
        return seq
    seq.append(p.derivative().positive_normalize())
    while True:
        r = seq[-2].rem(seq[-1])
        if r.is_zero():
            return seq
        seq.append(UniPoly([-c for c in r.coeffs]).positive_normalize())


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _variations(signs) -> int:
    s = [x for x in signs if x]
    return sum(1 for a, b in zip(s, s[1:]) if a != b)


def _signs_at(seq, x) -> list[int]:
    if x == math.inf:
        return [_sign(q.lc()) for q in seq]
    if x == -math.inf:
        return [_sign(q.lc()) * (-1 if q.degree % 2 else 1) for q in seq]
    return [_sign(q(x)) for q in seq]


def count_real_roots(p: UniPoly, a=None, b=None) -> int:
    """Distinct real roots, over all of R or over the half-open interval (a, b]."""
    if isinstance(p, Poly):
        p = UniPoly.from_poly(p)
    if p.is_zero():
        raise ValueError("the zero polynomial has infinitely many roots")
    seq = sturm_sequence(p)
    lo = -math.inf if a is None else Fraction(a)
    hi = math.inf if b is None else Fraction(b)
    if lo != -math.inf and hi != math.inf and lo >= hi:
        return 0
    return _variations(_signs_at(seq, lo)) - _variations(_signs_at(seq, hi))


@dataclass(frozen=True)
class Structure:
    all_coeffs_positive: bool
    exponent_parity: str  # all-odd | all-even | mixed


def structural_checks(p: UniPoly) -> Structure:
    if isinstance(p, Poly):
        p = UniPoly.from_poly(p)
    nz = [(i, c) for i, c in enumerate(p.coeffs) if c]
    positive = all(c > 0 for _, c in nz)
    parities = {i % 2 for i, _ in nz}
    parity = "mixed" if len(parities) > 1 else ("all-odd" if parities == {1} else "all-even")
    return Structure(positive, parity)


def descartes_bound(p: UniPoly) -> int:
    """Sign changes in the coefficient list: an upper bound on positive roots."""
    return _variations([_sign(c) for c in p.coeffs])
