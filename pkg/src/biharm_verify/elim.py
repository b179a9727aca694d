"""Elimination operations with replayable cofactor certificates.

Every operation returns its output together with the multipliers that
express the raw output as a combination of the inputs.  The certificate
is checked by plain ring arithmetic, so a reader can trust the identity
without trusting the elimination code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import limits
from .poly import NotDivisible, Poly, divide_exact


class NotLinear(ValueError):
    pass


class VariableAbsent(ValueError):
    pass


@dataclass(frozen=True)
class Certificate:
    """``output == sum(cofactor_i * input_i)`` as a polynomial identity."""

    inputs: tuple
    cofactors: tuple
    output: Poly

    def replay(self) -> bool:
        acc = Poly.zero(self.output.table)
        for c, p in zip(self.cofactors, self.inputs):
            acc = acc + c * p
        return acc == self.output

    def scaled(self, s) -> "Certificate":
        return Certificate(self.inputs, tuple(c.scale(s) for c in self.cofactors), self.output.scale(s))


@dataclass(frozen=True)
class Equation:
    id: str
    poly: Poly
    anchor: str = ""
    nonvanishing: tuple = ()
    certificate: Certificate | None = None
    content: Fraction = Fraction(1)  # raw output == content * poly

    @property
    def raw(self) -> Poly:
        return self.poly if self.content == 1 else self.poly.scale(self.content)

    @classmethod
    def canonical(cls, id: str, poly: Poly, **kw) -> "Equation":
        return cls(id, poly.primitive() if poly else poly, **kw)


def _poly(x) -> Poly:
    return x.poly if isinstance(x, Equation) else x


def _finish(raw: Poly, cert: Certificate | None, id: str = "") -> Equation:
    """Primitive normalization; the certificate is rescaled to match."""
    if raw.is_zero():
        return Equation(id, raw, certificate=cert)
    content, prim = raw.content_and_primitive()
    if cert is not None and content != 1:
        cert = cert.scaled(Fraction(1) / Fraction(content))
    return Equation(id, prim, certificate=cert, content=Fraction(content))


def _need(p: Poly, v, what: str) -> int:
    d = p.degree_in(v)
    if d < 1:
        raise VariableAbsent(f"{p.table.names[p.table.resolve(v)]} does not occur in the {what}")
    return d


def eliminate_var_linear(a, b, v) -> Equation:
    """Primitive part of ``coeff(b,v)*a - coeff(a,v)*b`` for inputs linear in ``v``."""
    pa, pb = _poly(a), _poly(b)
    for p, what in ((pa, "first input"), (pb, "second input")):
        if _need(p, v, what) != 1:
            raise NotLinear(f"{p.table.names[p.table.resolve(v)]} is not linear in the {what}")
    ca, cb = pa.coeff_in(v, 1), pb.coeff_in(v, 1)
    raw = cb * pa - ca * pb
    return _finish(raw, Certificate((pa, pb), (cb, -ca), raw))


def eliminate_leading(a, b, v) -> Equation:
    """Cancel the common top power of ``v``: ``lc(b)*a - lc(a)*b``."""
    pa, pb = _poly(a), _poly(b)
    da, db = _need(pa, v, "first input"), _need(pb, v, "second input")
    if da != db:
        raise ValueError(f"top degrees differ ({da} vs {db})")
    ca, cb = pa.coeff_in(v, da), pb.coeff_in(v, db)
    raw = cb * pa - ca * pb
    return _finish(raw, Certificate((pa, pb), (cb, -ca), raw))


def linear_parts(rel: Poly, v) -> tuple[Poly, Poly]:
    if rel.degree_in(v) != 1:
        raise NotLinear("relation is not linear in the substituted variable")
    return rel.coeff_in(v, 1), rel.coeff_in(v, 0)


def substitute_linear_solution(relation, target, v, certify: bool = True) -> Equation:
    """``A**d * target`` with each ``A*v`` replaced by ``-B``, where relation = A*v + B.

    ``A`` is a multiplier (assumed nonzero), not a divisor.
    """
    rel, tgt = _poly(relation), _poly(target)
    A, B = linear_parts(rel, v)
    coeffs = tgt.as_univariate(v)
    d = max(coeffs)
    if d == 0:
        return _finish(tgt, Certificate((rel, tgt), (Poly.zero(tgt.table), Poly.const(tgt.table, 1)), tgt) if certify else None)
    negB = -B
    raw = Poly.zero(tgt.table)
    # Horner in (-B) with powers of A for the lower terms
    a_pow = Poly.const(tgt.table, 1)
    for k in range(d, -1, -1):
        if k != d:
            raw = raw * negB
            a_pow = a_pow * A
        c = coeffs.get(k)
        if c is not None:
            raw = raw + c * a_pow
        limits.check_time()
    cert = None
    if certify:
        Ad = a_pow
        q = divide_exact(Ad * tgt - raw, rel)
        cert = Certificate((rel, tgt), (-q, Ad), raw)
    return _finish(raw, cert)


def reduce(target, relation, v) -> Equation:
    """Pseudo-remainder of ``target`` by ``relation`` in ``v``.

    When the leading coefficient of the relation divides the current top
    coefficient exactly, the quotient is used and no multiplier is introduced.
    """
    tgt, rel = _poly(target), _poly(relation)
    m = _need(rel, v, "relation")
    lc = rel.coeff_in(v, m)
    x = tgt.table.var(v)
    mult = Poly.const(tgt.table, 1)
    qacc = Poly.zero(tgt.table)
    cur = tgt
    while not cur.is_zero() and cur.degree_in(v) >= m:
        dcur = cur.degree_in(v)
        c = cur.coeff_in(v, dcur)
        shift = x ** (dcur - m)
        try:
            q = divide_exact(c, lc)
        except NotDivisible:
            cur = lc * cur - c * shift * rel
            mult = mult * lc
            qacc = qacc * lc + c * shift
        else:
            cur = cur - q * shift * rel
            qacc = qacc + q * shift
        limits.check_time()
    return _finish(cur, Certificate((tgt, rel), (mult, -qacc), cur))


def _mono_divides(table, small: int, big: int) -> bool:
    return all(x <= y for x, y in zip(table.unpack(small), table.unpack(big)))


def rewrite(target, relation, monomial: Poly) -> Equation:
    """Rewrite every multiple of ``monomial`` using ``relation`` until none is left.

    The relation must contain ``monomial`` with a constant coefficient and no
    other term divisible by it.
    """
    tgt, rel = _poly(target), _poly(relation)
    table = tgt.table
    if len(monomial) != 1:
        raise ValueError("rewrite needs a single monomial")
    (M, _), = monomial.terms.items()
    cM = rel.terms.get(M)
    if cM is None:
        raise ValueError(f"relation does not contain {monomial}")
    for m in rel.terms:
        if m != M and _mono_divides(table, M, m):
            raise ValueError("relation has other terms divisible by the rewrite monomial")
    cM = Fraction(cM)
    cur = dict(tgt.terms)
    qterms: dict[int, Fraction] = {}
    rel_items = list(rel.terms.items())
    guard = 0
    while True:
        hits = [m for m in cur if _mono_divides(table, M, m)]
        if not hits:
            break
        m = max(hits)
        f = Fraction(cur[m]) / cM
        s = m - M
        qterms[s] = qterms.get(s, 0) + f
        for mm, cc in rel_items:
            key = mm + s
            val = cur.get(key, 0) - f * cc
            if val:
                cur[key] = val
            else:
                cur.pop(key, None)
        guard += 1
        if guard & 255 == 0:
            limits.check_time()
            limits.check_terms(len(cur))
    out = Poly(table, cur)
    q = Poly(table, qterms)
    return _finish(out, Certificate((tgt, rel), (Poly.const(table, 1), -q), out))


def strip_factors(p: Poly, factors: Sequence[Poly]) -> tuple[Poly, list[Poly]]:
    """Divide out each listed factor as often as it divides; returns the rest and what was removed."""
    removed = []
    if p.is_zero():
        return p, removed
    changed = True
    while changed:
        changed = False
        for f in factors:
            if f.is_constant() or f.degree() > p.degree():
                continue
            try:
                q = divide_exact(p, f)
            except NotDivisible:
                continue
            p = q
            removed.append(f)
            changed = True
    return p, removed


# determinants and resultants

def det(matrix: Sequence[Sequence[Poly]]) -> Poly:
    """Fraction-free Bareiss determinant."""
    n = len(matrix)
    if n == 0:
        raise ValueError("empty matrix")
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix is not square")
    table = matrix[0][0].table
    M = [list(row) for row in matrix]
    sign = 1
    prev = Poly.const(table, 1)
    for k in range(n - 1):
        if M[k][k].is_zero():
            for r in range(k + 1, n):
                if not M[r][k].is_zero():
                    M[k], M[r] = M[r], M[k]
                    sign = -sign
                    break
            else:
                return Poly.zero(table)
        piv = M[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                val = piv * M[i][j] - M[i][k] * M[k][j]
                M[i][j] = divide_exact(val, prev) if not prev.is_constant() else val.scale(Fraction(1) / Fraction(prev.constant_value()))
            limits.check_time()
        prev = piv
    out = M[n - 1][n - 1]
    return -out if sign < 0 else out


def sylvester_matrix(p: Poly, q: Poly, v) -> list[list[Poly]]:
    m = _need(p, v, "first polynomial")
    n = _need(q, v, "second polynomial")
    table = p.table
    zero = Poly.zero(table)
    pc = [p.coeff_in(v, m - i) for i in range(m + 1)]
    qc = [q.coeff_in(v, n - i) for i in range(n + 1)]
    size = m + n
    rows = []
    for r in range(n):
        row = [zero] * size
        for i, c in enumerate(pc):
            row[r + i] = c
        rows.append(row)
    for r in range(m):
        row = [zero] * size
        for i, c in enumerate(qc):
            row[r + i] = c
        rows.append(row)
    return rows


def sylvester_resultant(p, q, v) -> Poly:
    return det(sylvester_matrix(_poly(p), _poly(q), v))


def resultant_with_cofactors(p, q, v) -> tuple[Poly, Poly, Poly]:
    """``(res, u, w)`` with ``res == u*p + w*q``.

    Uses the last column of the adjugate of the Sylvester matrix.
    """
    pp, qq = _poly(p), _poly(q)
    S = sylvester_matrix(pp, qq, v)
    size = len(S)
    m, n = pp.degree_in(v), qq.degree_in(v)
    res = det(S)
    x = pp.table.var(v)
    table = pp.table
    u = Poly.zero(table)
    w = Poly.zero(table)
    for j in range(size):
        if size == 1:
            cof = Poly.const(table, 1)
        else:
            minor = [row[:-1] for r, row in enumerate(S) if r != j]
            cof = det(minor)
            if (j + size - 1) % 2:
                cof = -cof
        if cof.is_zero():
            continue
        if j < n:
            u = u + cof * x ** (n - 1 - j)
        else:
            w = w + cof * x ** (m - 1 - (j - n))
    return res, u, w


# successive elimination

OK = "ok"
DEGENERATE = "degenerate"
INCOMPLETE = "incomplete"


@dataclass
class EliminationRun:
    status: str
    survivors: list = field(default_factory=list)  # list[Poly]
    cofactors: list = field(default_factory=list)  # per survivor, one cofactor per input
    inputs: tuple = ()
    log: list = field(default_factory=list)
    reason: str = ""

    @property
    def result(self) -> Poly | None:
        return self.survivors[0] if self.survivors else None

    def certificates(self) -> list[Certificate]:
        return [Certificate(self.inputs, tuple(c), s) for s, c in zip(self.survivors, self.cofactors)]


def successive_eliminate(eqs: Sequence, order: Sequence, certify: bool = True) -> EliminationRun:
    """Remove the variables of ``order`` one after another.

    A pivot of lowest degree in the current variable is combined with every
    other equation that contains it: by linear substitution when the pivot
    is linear, by a Sylvester resultant otherwise.  A common exponent gcd
    is divided out first, so a variable appearing only squared is treated
    as linear in its square.  Primitive parts are taken after every stage.
    """
    polys = [_poly(e) for e in eqs]
    if not polys:
        raise ValueError("empty system")
    table = polys[0].table
    n_in = len(polys)
    zero = Poly.zero(table)
    run = EliminationRun(OK, inputs=tuple(polys))

    def unit(i):
        return [Poly.const(table, 1) if j == i else zero for j in range(n_in)]

    current = [(p, unit(i) if certify else None) for i, p in enumerate(polys) if not p.is_zero()]
    if not current:
        run.status = DEGENERATE
        run.reason = "every input is identically zero"
        return run
    annihilated = False
    try:
        for v in order:
            vi = table.resolve(v)
            vname = table.names[vi]
            involved = [(p, c) for p, c in current if p.occurs(vi)]
            rest = [(p, c) for p, c in current if not p.occurs(vi)]
            if not involved:
                run.log.append(f"{vname}: absent")
                continue
            if len(involved) == 1:
                run.log.append(f"{vname}: only one equation, dropped")
                current = rest
                continue
            g = 0
            for p, _ in involved:
                g = math.gcd(g, p.exponent_gcd(vi))
            if g > 1:
                involved = [(p.deflate(vi, g), c) for p, c in involved]
            involved.sort(key=lambda pc: (pc[0].degree_in(vi), len(pc[0])))
            pivot, pc = involved[0]
            produced = []
            for p, c in involved[1:]:
                limits.check_time()
                if pivot.degree_in(vi) == 1:
                    how = "linear"
                    r = substitute_linear_solution(pivot, p, vi, certify=certify)
                    raw_cofs = r.certificate.cofactors if certify else None
                else:
                    how = "resultant"
                    if certify:
                        res, u, w = resultant_with_cofactors(pivot, p, vi)
                        r = _finish(res, Certificate((pivot, p), (u, w), res))
                        raw_cofs = r.certificate.cofactors
                    else:
                        r = _finish(sylvester_resultant(pivot, p, vi), None)
                if g > 1 and certify:
                    # cofactors were computed in the deflated variable; inflate them back
                    raw_cofs = tuple(_inflate(cf, vi, g) for cf in raw_cofs)
                if r.poly.is_zero():
                    annihilated = True
                    run.log.append(f"{vname}: {how} elimination annihilated")
                    continue
                cof = None
                if certify:
                    k0, k1 = raw_cofs
                    cof = [k0 * x + k1 * y for x, y in zip(pc, c)]
                produced.append((r.poly, cof))
                run.log.append(f"{vname}: {how} -> {len(r.poly)} terms, degree {r.poly.degree()}")
                limits.check_terms(len(r.poly))
            current = rest + produced
        if not current:
            run.status = DEGENERATE
            run.reason = "every elimination annihilated" if annihilated else "no equation survived"
            return run
        current.sort(key=lambda pc: (len(pc[0]), pc[0].degree()))
        run.survivors = [p for p, _ in current]
        run.cofactors = [c for _, c in current] if certify else []
        return run
    except limits.ResourceExceeded as exc:
        run.status = INCOMPLETE
        run.reason = str(exc)
        return run


def _inflate(p: Poly, vi: int, g: int) -> Poly:
    t = p.table
    terms = {}
    for m, c in p.terms.items():
        e = t.exponent(m, vi)
        terms[m - t.pack_var(vi, e) + t.pack_var(vi, e * g)] = c
    return Poly(t, terms)


def differential_eliminate(p, q, order: Sequence, derivation, strip: Sequence = ()) -> EliminationRun:
    """Pair descent for two differential equations in one unknown function.

    ``order`` lists jet variables from the highest down.  At each variable
    both current equations are made to contain it (differentiating the one
    that stops one order short), it is eliminated between them to give
    ``r``, and ``D(r)`` is combined with the simpler of the two to give a
    second equation of lower order.  No ideal certificate exists for this
    procedure because it differentiates; the log records each stage.
    """
    from .diffring import derive

    a, b = _poly(p), _poly(q)
    table = a.table
    run = EliminationRun(OK, inputs=(a, b))

    def combine(x, y, vi):
        if x.degree_in(vi) > y.degree_in(vi):
            x, y = y, x
        if x.degree_in(vi) == 1:
            r = substitute_linear_solution(x, y, vi, certify=False).poly
        else:
            r = _finish(sylvester_resultant(x, y, vi), None).poly
        if not r.is_zero():
            r, _ = strip_factors(r, strip)
            r = r.primitive()
        limits.check_terms(len(r))
        return r

    def as_poly(v):
        if not isinstance(v, Poly):
            raise ValueError("derivative is not polynomial")
        return v

    try:
        for k, v in enumerate(order):
            vi = table.resolve(v)
            name = table.names[vi]
            with limits.stage():
                if not a.occurs(vi):
                    a = as_poly(derive(a, derivation))
                if not b.occurs(vi):
                    b = as_poly(derive(b, derivation))
                if not (a.occurs(vi) and b.occurs(vi)):
                    run.status = DEGENERATE
                    run.reason = f"{name} cannot be brought into both equations"
                    return run
                r = combine(a, b, vi)
                if r.is_zero():
                    run.status = DEGENERATE
                    run.reason = f"elimination of {name} annihilated"
                    return run
                run.log.append(f"{name}: first -> {len(r)} terms, degree {r.degree()}")
                if k == len(order) - 1:
                    run.survivors = [r]
                    return run
                simpler = min((a, b), key=lambda x: (x.degree_in(vi), len(x)))
                dr = as_poly(derive(r, derivation))
                if not dr.occurs(vi):
                    run.status = DEGENERATE
                    run.reason = f"derivative of the {name}-free equation lacks {name}"
                    return run
                s = combine(dr, simpler, vi)
                if s.is_zero():
                    run.status = DEGENERATE
                    run.reason = f"second elimination of {name} annihilated"
                    return run
                run.log.append(f"{name}: second -> {len(s)} terms, degree {s.degree()}")
                a, b = r, s
        run.survivors = [a, b]
        return run
    except limits.ResourceExceeded as exc:
        run.status = INCOMPLETE
        run.reason = str(exc)
        return run
