"""Running registry steps against a corpus.

Each step evaluates one or more expressions in a small language built on
the polynomial grammar: ``{ID}`` pulls a corpus entry, ``{@STEP}`` pulls
the value another step produced, and a handful of functions expose the
kernel operations.  Results are compared with the expected entries and
reduced to a status.

Expression functions return raw combinations (no primitive normalization)
so that they compose predictably; ``prim`` normalizes explicitly.
"""
from __future__ import annotations

import fnmatch
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import elim, limits
from .corpus import Corpus, Step, expression_refs, split_expected, split_inputs
from .diffring import RatFunc, derive, substitute
from .parser import Evaluator, ParseError, parse_ast
from .poly import NotDivisible, Poly, divide_exact, equal_up_to_scalar
from .printing import format_coefficient, format_monomial, format_poly, format_value
from .realroots import UniPoly, count_real_roots, descartes_bound, structural_checks

MATCH = "MATCH"
MATCH_UP_TO_SCALAR = "MATCH_UP_TO_SCALAR"
MISMATCH = "MISMATCH"
DEGENERATE = "DEGENERATE"
INCOMPLETE = "INCOMPLETE"
SKIPPED = "SKIPPED"

MAX_DIFF = 20
DEFAULT_RULES = "jets"


class StepFailure(Exception):
    """The step ran but its claim does not hold; reported as MISMATCH."""


@dataclass
class StepResult:
    id: str
    kind: str
    status: str
    pipeline_status: str = ""
    scalar: Fraction | None = None
    denominators: list = field(default_factory=list)  # list[Poly]
    multipliers: list = field(default_factory=list)  # list[Poly]
    diff: list = field(default_factory=list)  # (monomial, recomputed, expected)
    certificate: str = "none"
    detail: str = ""
    runtime_ms: float | None = None
    anchor: str = ""
    negative_control: bool = False
    value: object = None  # not serialized

    @property
    def ok(self) -> bool:
        if self.negative_control:
            return self.status == DEGENERATE
        return self.status in (MATCH, MATCH_UP_TO_SCALAR, SKIPPED)


@dataclass
class RunOptions:
    time_limit: float = limits.DEFAULT_TIME_LIMIT
    term_cap: int = limits.DEFAULT_TERM_CAP
    include_extended: bool = False
    jobs: int = 1
    timings: bool = False


# evaluation

def _strip_pos(node):
    if isinstance(node, tuple):
        return (node[0],) + tuple(_strip_pos(x) for x in node[2:])
    if isinstance(node, list):
        return tuple(_strip_pos(x) for x in node)
    return node


def _as_poly(v, what="argument") -> Poly:
    if isinstance(v, Poly):
        return v
    if isinstance(v, RatFunc):
        if v.den.is_constant():
            return v.num.scale(Fraction(1) / Fraction(v.den.constant_value()))
        try:
            return v.to_poly()
        except NotDivisible:
            raise StepFailure(f"{what} is a rational function, a polynomial is needed") from None
    raise StepFailure(f"{what} has unexpected type {type(v).__name__}")


def _as_int(v, what) -> int:
    p = _as_poly(v, what)
    if not p.is_constant() or Fraction(p.constant_value()).denominator != 1:
        raise StepFailure(f"{what} must be an integer literal")
    return int(p.constant_value())


class _Context:
    """Per-step, per-mode evaluation state."""

    def __init__(self, engine: "Engine", step: Step, pipeline: bool):
        self.engine = engine
        self.corpus = engine.corpus
        self.step = step
        self.pipeline = pipeline
        name = step.rules or DEFAULT_RULES
        self.derivation = self.corpus.rules.get(name)
        self.ledger: list[Poly] = []
        self.multipliers: list[Poly] = []
        self.certs: list[elim.Certificate] = []
        self.memo: dict = {}
        self.used_refs: set[str] = set()

    # references

    def ref(self, name: str, pos=0):
        self.used_refs.add(name)
        if name.startswith("@"):
            sid = name[1:]
            res = self.engine.results_for(sid, self.pipeline)
            if res is None or res.value is None:
                raise StepFailure(f"step {sid} produced no value")
            if isinstance(res.value, tuple):
                raise StepFailure(f"step {sid} produced several values")
            return res.value
        if self.pipeline:
            override = self.engine.pipeline_override(name, self.step.id)
            if override is not None:
                return override
        return self.corpus.equations[name].value

    # evaluation

    def evaluate(self, text: str):
        ast = parse_ast(text, allow_calls=True, source=f"step {self.step.id}")
        ev = _MemoEvaluator(self, text)
        return ev.eval(ast)

    def allowed_factors(self) -> list[Poly]:
        out = list(self.corpus.nonvanishing)
        for name in sorted(self.used_refs):
            if not name.startswith("@"):
                out.extend(self.corpus.equations[name].nonvanishing)
            else:
                out.extend(self.engine.step_nonvanishing(name[1:]))
        return out

    # functions

    def call(self, name, args, pos, ev):
        fn = getattr(self, "fn_" + name, None)
        if fn is None:
            raise StepFailure(f"unknown function {name}()")
        return fn(ev, args)

    def _var(self, ev, node) -> int:
        v = _as_poly(ev.eval(node), "variable argument")
        i = v.as_variable()
        if i is None:
            raise StepFailure(f"{format_poly(v)} is not a single variable")
        return i

    def _need_args(self, args, n, name):
        if len(args) != n:
            raise StepFailure(f"{name}() takes {n} arguments, got {len(args)}")

    def fn_D(self, ev, args):
        self._need_args(args, 1, "D")
        if self.derivation is None:
            raise StepFailure("no derivation rules for this step")
        return derive(ev.eval(args[0]), self.derivation)

    def fn_subs(self, ev, args):
        if len(args) < 3 or len(args) % 2 == 0:
            raise StepFailure("subs() takes an expression and variable/value pairs")
        val = ev.eval(args[0])
        for i in range(1, len(args), 2):
            v = self._var(ev, args[i])
            val = substitute(val, v, ev.eval(args[i + 1]))
        return val

    def _record(self, cert):
        if cert is not None:
            self.certs.append(cert)

    def fn_elim(self, ev, args):
        self._need_args(args, 3, "elim")
        a, b = _as_poly(ev.eval(args[0])), _as_poly(ev.eval(args[1]))
        v = self._var(ev, args[2])
        try:
            eq = elim.eliminate_var_linear(a, b, v)
        except (elim.NotLinear, elim.VariableAbsent) as exc:
            raise StepFailure(str(exc)) from None
        return self._raw(eq)

    def fn_elimlead(self, ev, args):
        self._need_args(args, 3, "elimlead")
        a, b = _as_poly(ev.eval(args[0])), _as_poly(ev.eval(args[1]))
        v = self._var(ev, args[2])
        try:
            eq = elim.eliminate_leading(a, b, v)
        except ValueError as exc:
            raise StepFailure(str(exc)) from None
        return self._raw(eq)

    def _raw(self, eq: elim.Equation) -> Poly:
        cert = eq.certificate
        if cert is not None and eq.content != 1:
            cert = cert.scaled(eq.content)
        self._record(cert)
        return eq.raw

    def fn_linsub(self, ev, args):
        self._need_args(args, 3, "linsub")
        rel, tgt = _as_poly(ev.eval(args[0])), _as_poly(ev.eval(args[1]))
        v = self._var(ev, args[2])
        try:
            A, _ = elim.linear_parts(rel, v)
            eq = elim.substitute_linear_solution(rel, tgt, v)
        except elim.NotLinear as exc:
            raise StepFailure(str(exc)) from None
        if not A.is_constant():
            self.multipliers.append(A)
        return self._raw(eq)

    def fn_reduce(self, ev, args):
        self._need_args(args, 3, "reduce")
        tgt, rel = _as_poly(ev.eval(args[0])), _as_poly(ev.eval(args[1]))
        v = self._var(ev, args[2])
        try:
            eq = elim.reduce(tgt, rel, v)
        except elim.VariableAbsent as exc:
            raise StepFailure(str(exc)) from None
        mult = eq.certificate.cofactors[0].scale(eq.content)
        if not mult.is_constant():
            self.multipliers.append(mult)
        return self._raw(eq)

    def fn_rewrite(self, ev, args):
        self._need_args(args, 3, "rewrite")
        tgt, rel = _as_poly(ev.eval(args[0])), _as_poly(ev.eval(args[1]))
        mono = _as_poly(ev.eval(args[2]))
        try:
            eq = elim.rewrite(tgt, rel, mono)
        except ValueError as exc:
            raise StepFailure(str(exc)) from None
        return self._raw(eq)

    def fn_res(self, ev, args):
        self._need_args(args, 3, "res")
        a, b = _as_poly(ev.eval(args[0])), _as_poly(ev.eval(args[1]))
        v = self._var(ev, args[2])
        try:
            r, u, w = elim.resultant_with_cofactors(a, b, v)
        except elim.VariableAbsent as exc:
            raise StepFailure(str(exc)) from None
        self._record(elim.Certificate((a, b), (u, w), r))
        return r

    def fn_det(self, ev, args):
        if not args:
            raise StepFailure("det() needs a size")
        n = _as_int(ev.eval(args[0]), "matrix size")
        if len(args) != 1 + n * n:
            raise StepFailure(f"det() of size {n} needs {n * n} entries")
        vals = [_as_poly(ev.eval(a)) for a in args[1:]]
        return elim.det([vals[r * n:(r + 1) * n] for r in range(n)])

    def fn_coeff(self, ev, args):
        self._need_args(args, 3, "coeff")
        p = _as_poly(ev.eval(args[0]))
        v = self._var(ev, args[1])
        return p.coeff_in(v, _as_int(ev.eval(args[2]), "power"))

    def fn_quo(self, ev, args):
        self._need_args(args, 2, "quo")
        p, d = _as_poly(ev.eval(args[0])), _as_poly(ev.eval(args[1]))
        try:
            q = divide_exact(p, d)
        except NotDivisible:
            raise StepFailure(f"{format_poly(d)} does not divide the expression") from None
        if not d.is_constant():
            self.ledger.append(d)
        return q

    def fn_strip(self, ev, args):
        self._need_args(args, 1, "strip")
        p = _as_poly(ev.eval(args[0]))
        out, removed = elim.strip_factors(p, self.allowed_factors())
        self.ledger.extend(removed)
        return out

    def fn_prim(self, ev, args):
        self._need_args(args, 1, "prim")
        p = _as_poly(ev.eval(args[0]))
        return p.primitive() if p else p

    def fn_solve(self, ev, args):
        self._need_args(args, 2, "solve")
        p = _as_poly(ev.eval(args[0]))
        v = self._var(ev, args[1])
        try:
            A, B = elim.linear_parts(p, v)
        except elim.NotLinear as exc:
            raise StepFailure(str(exc)) from None
        if A.is_zero():
            raise StepFailure(f"{p.table.names[v]} does not occur")
        if not A.is_constant():
            self.ledger.append(A)
        return RatFunc(-B, A) if not A.is_constant() else (-B).scale(Fraction(1) / Fraction(A.constant_value()))

    def fn_num(self, ev, args):
        self._need_args(args, 1, "num")
        v = ev.eval(args[0])
        if isinstance(v, RatFunc):
            if not v.den.is_constant():
                self.ledger.append(v.den)
            return v.num
        return v

    def fn_vanish(self, ev, args):
        if len(args) < 3:
            raise StepFailure("vanish() takes an expression, a variable and powers")
        p = _as_poly(ev.eval(args[0]))
        v = self._var(ev, args[1])
        for a in args[2:]:
            k = _as_int(ev.eval(a), "power")
            c = p.coeff_in(v, k)
            if not c.is_zero():
                raise StepFailure(f"coefficient of {p.table.names[v]}^{k} does not vanish ({len(c)} terms)")
        return p


class _MemoEvaluator(Evaluator):
    def __init__(self, ctx: _Context, text: str):
        super().__init__(ctx.corpus.table, "rational", ref=ctx.ref, call=ctx.call,
                         text=text, source=f"step {ctx.step.id}")
        self.ctx = ctx

    def eval(self, node):
        if node[0] in ("num", "var"):
            return super().eval(node)
        key = _strip_pos(node)
        memo = self.ctx.memo
        if key not in memo:
            memo[key] = super().eval(node)
        return memo[key]


# comparison

def _canonical(v):
    if isinstance(v, RatFunc):
        if v.den.is_constant():
            return _canonical(v.num)
        if v.num.is_zero():
            return Poly.zero(v.table)
        return RatFunc(v.num.primitive(), v.den)
    return v.primitive() if v else v


def _cross(a, b) -> tuple[Poly, Poly]:
    """Polynomials ``x, y`` with ``a == s*b`` iff ``x == s*y``."""
    ra, rb = RatFunc.lift(a), RatFunc.lift(b)
    if ra.den == rb.den:
        return ra.num, rb.num
    return ra.num * rb.den, rb.num * ra.den


def _term_diff(x: Poly, y: Poly, s) -> list:
    """Terms where ``x`` and ``s*y`` differ, largest monomial first."""
    ys = y.scale(s) if s not in (None, 1) else y
    out = []
    for m in sorted(set(x.terms) | set(ys.terms), reverse=True):
        cx, cy = x.terms.get(m, 0), ys.terms.get(m, 0)
        if cx != cy:
            out.append((format_monomial(x.table, m) or "1", format_coefficient(cx), format_coefficient(cy)))
            if len(out) >= MAX_DIFF:
                break
    return out


def _lc_ratio(x: Poly, y: Poly):
    # only rescale when the leading monomials agree, otherwise the ratio means nothing
    if x.is_zero() or y.is_zero() or x.leading()[0] != y.leading()[0]:
        return 1
    return Fraction(x.leading_coefficient()) / Fraction(y.leading_coefficient())


@dataclass
class _Cmp:
    status: str
    scalar: Fraction | None = None
    diff: list = field(default_factory=list)
    detail: str = ""


def compare(recomputed, expected, mode: str, allowed=()) -> _Cmp:
    """Compare a recomputed value against an expected one.

    ``exact`` wants equality of the raw values.  ``up_to_scalar`` compares
    the primitive, positive-leading form of the recomputed value and
    reports the scalar ``s`` with ``canonical == s * expected``.
    ``multiple`` accepts ``recomputed == q * expected`` where ``q``
    factors over ``allowed`` up to a constant.
    """
    if mode == "exact":
        x, y = _cross(recomputed, expected)
        if x == y:
            return _Cmp(MATCH)
        s = equal_up_to_scalar(x, y)
        if s is not None:
            return _Cmp(MISMATCH, Fraction(s), [], f"equal only up to the scalar {format_coefficient(s)}")
        return _Cmp(MISMATCH, None, _term_diff(x, y, 1), "values differ")
    if mode == "multiple":
        x, y = _cross(recomputed, expected)
        if x.is_zero():
            return _Cmp(DEGENERATE, None, [], "recomputed value is identically zero")
        try:
            q = divide_exact(x, y)
        except NotDivisible:
            return _Cmp(MISMATCH, None, _term_diff(x, y, _lc_ratio(x, y)), "expected value does not divide the recomputed one")
        rest, removed = elim.strip_factors(q, allowed)
        if not rest.is_constant():
            return _Cmp(MISMATCH, None, [], f"cofactor {format_poly(rest)} is not a product of nonvanishing factors")
        s = Fraction(rest.constant_value())
        factors = " * ".join(f"({format_poly(f)})" for f in removed) or "1"
        return _Cmp(MATCH_UP_TO_SCALAR, s, [], f"recomputed = {format_coefficient(s)} * {factors} * expected")
    # equations: denominators are nonvanishing (and ledgered), so compare numerators
    x = _canonical(RatFunc.lift(recomputed).num)
    y = RatFunc.lift(expected).num
    if x.is_zero() and not y.is_zero():
        return _Cmp(DEGENERATE, None, [], "recomputed value is identically zero")
    if x == y:
        return _Cmp(MATCH, Fraction(1))
    s = equal_up_to_scalar(x, y)
    if s is not None:
        return _Cmp(MATCH_UP_TO_SCALAR, Fraction(s))
    if allowed and not y.is_zero():
        xs, xr = elim.strip_factors(x, allowed)
        ys, yr = elim.strip_factors(y, allowed)
        s = equal_up_to_scalar(xs, ys)
        if s is not None and (xr or yr):
            gone = " * ".join(f"({format_poly(f)})" for f in xr + yr)
            return _Cmp(MATCH_UP_TO_SCALAR, Fraction(s), [],
                        f"equal after removing nonvanishing factors {gone}")
    return _Cmp(MISMATCH, None, _term_diff(x, y, _lc_ratio(x, y)), "values differ beyond a scalar")


def _covered(d: Poly, allowed) -> bool:
    if d.is_constant():
        return True
    rest, _ = elim.strip_factors(d, allowed)
    return rest.is_constant()


# the engine

def natural_key(sid: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", sid)]


class Engine:
    def __init__(self, corpus: Corpus, options: RunOptions | None = None):
        self.corpus = corpus
        self.options = options or RunOptions()
        self.results: dict[str, StepResult] = {}
        self.pipeline_results: dict[str, StepResult] = {}
        self.producer: dict[str, str] = {}
        for s in corpus.steps:
            if s.expected and s.expected in corpus.equations and s.kind not in (
                    "real_root_check", "collect_coeffs_compare", "product_compare"):
                self.producer.setdefault(s.expected, s.id)

    # lookups used during evaluation

    def results_for(self, sid: str, pipeline: bool) -> StepResult | None:
        if pipeline and sid in self.pipeline_results:
            return self.pipeline_results[sid]
        return self.results.get(sid)

    def pipeline_override(self, eid: str, requester: str):
        sid = self.producer.get(eid)
        if sid is None or sid == requester:
            return None
        res = self.pipeline_results.get(sid) or self.results.get(sid)
        if res is None or res.status in (MATCH, MATCH_UP_TO_SCALAR) or res.value is None:
            return None
        if isinstance(res.value, tuple):
            return None
        return res.value

    def step_nonvanishing(self, sid: str) -> list:
        step = self.corpus.step(sid)
        out = []
        for r in self.dependencies_refs(step):
            if not r.startswith("@") and r in self.corpus.equations:
                out.extend(self.corpus.equations[r].nonvanishing)
        return out

    def dependencies_refs(self, step: Step) -> list[str]:
        exprs, _ = split_inputs(step.inputs)
        out = []
        for e in exprs + split_expected(step.expected):
            out.extend(expression_refs(e))
        return out

    def dependencies(self, step: Step) -> list[str]:
        deps = []
        for r in self.dependencies_refs(step):
            if r.startswith("@"):
                deps.append(r[1:])
            elif r in self.producer and self.producer[r] != step.id:
                deps.append(self.producer[r])
        return sorted(set(deps), key=natural_key)

    # selection

    def select(self, pattern: str | None = None, ids=None) -> list[Step]:
        steps = self.corpus.steps
        if ids is not None:
            wanted = set(ids)
            return [s for s in steps if s.id in wanted]
        if pattern:
            return [s for s in steps if fnmatch.fnmatchcase(s.id, pattern)]
        return list(steps)

    def _closure(self, chosen: list[Step]) -> list[Step]:
        by_id = {s.id: s for s in self.corpus.steps}
        need = set()
        stack = [s.id for s in chosen]
        while stack:
            sid = stack.pop()
            if sid in need:
                continue
            need.add(sid)
            stack.extend(self.dependencies(by_id[sid]))
        return [s for s in self.corpus.steps if s.id in need]

    def _levels(self, steps: list[Step]) -> list[list[Step]]:
        ids = {s.id for s in steps}
        done: set[str] = set()
        remaining = list(steps)
        levels = []
        while remaining:
            ready = [s for s in remaining if all(d in done or d not in ids for d in self.dependencies(s))]
            if not ready:
                raise ValueError("dependency cycle among steps: " + ", ".join(s.id for s in remaining))
            levels.append(ready)
            done.update(s.id for s in ready)
            remaining = [s for s in remaining if s.id not in done]
        return levels

    def run(self, chosen: list[Step]) -> list[StepResult]:
        todo = self._closure(chosen)
        for level in self._levels(todo):
            if self.options.jobs > 1 and len(level) > 1:
                with ThreadPoolExecutor(max_workers=self.options.jobs) as pool:
                    outs = list(pool.map(self._run_both, level))
            else:
                outs = [self._run_both(s) for s in level]
            for s, (res, pres) in zip(level, outs):
                self.results[s.id] = res
                if pres is not None:
                    self.pipeline_results[s.id] = pres
        wanted = {s.id for s in chosen}
        return sorted((self.results[sid] for sid in wanted), key=lambda r: natural_key(r.id))

    def _needs_pipeline(self, step: Step) -> bool:
        for r in self.dependencies_refs(step):
            if r.startswith("@"):
                if r[1:] in self.pipeline_results:
                    return True
            elif self.pipeline_override(r, step.id) is not None:
                return True
        return False

    def _run_both(self, step: Step):
        res = self.run_step(step, pipeline=False)
        pres = None
        if self._needs_pipeline(step):
            pres = self.run_step(step, pipeline=True)
            res.pipeline_status = pres.status
        else:
            res.pipeline_status = res.status
        return res, pres

    def run_step(self, step: Step, pipeline: bool = False) -> StepResult:
        neg = "negative_control" in step.mode_tokens
        res = StepResult(step.id, step.kind, SKIPPED, anchor=step.anchor, negative_control=neg)
        if step.extended and not self.options.include_extended:
            res.detail = "extended step; run with --include-extended"
            return res
        total = step.caps.get("time")
        stage = self.options.time_limit if total is None else min(self.options.time_limit, float(total))
        caps = limits.Caps(int(step.caps.get("terms", self.options.term_cap)), float(stage),
                           None if total is None else float(total))
        ctx = _Context(self, step, pipeline)
        t0 = time.perf_counter()
        try:
            with limits.capped(caps):
                _KINDS[step.kind](self, step, ctx, res)
                self._check_certificates(ctx, res)
                self._check_ledger(ctx, res)
        except limits.ResourceExceeded as exc:
            res.status = INCOMPLETE
            res.detail = str(exc)
        except StepFailure as exc:
            res.status = MISMATCH
            res.detail = str(exc)
        except (ParseError, ZeroDivisionError, ValueError, KeyError) as exc:
            res.status = MISMATCH
            res.detail = f"evaluation error: {exc}"
        if self.options.timings:
            res.runtime_ms = round((time.perf_counter() - t0) * 1000.0, 3)
        return res

    def _check_certificates(self, ctx: _Context, res: StepResult):
        if not ctx.certs:
            return
        bad = sum(1 for c in ctx.certs if not c.replay())
        if bad:
            res.certificate = f"FAILED ({bad} of {len(ctx.certs)})"
            res.status = MISMATCH
            res.detail = (res.detail + "; " if res.detail else "") + "cofactor certificate does not replay"
        else:
            res.certificate = f"verified ({len(ctx.certs)})"

    def _check_ledger(self, ctx: _Context, res: StepResult):
        allowed = ctx.allowed_factors()
        seen = []
        for d in ctx.ledger:
            d = d.primitive()
            if any(d == e for e in seen):
                continue
            seen.append(d)
        res.denominators = seen
        res.multipliers = ctx.multipliers
        bad = [d for d in seen if not _covered(d, allowed)]
        if bad:
            res.status = MISMATCH
            res.detail = (res.detail + "; " if res.detail else "") + "denominator not covered by the nonvanishing set: " + \
                ", ".join(format_poly(d) for d in bad)

    # expected values

    def _expected(self, text: str, ctx: _Context):
        if text in self.corpus.equations:
            return ctx.ref(text)
        return ctx.evaluate(text)

    def _note_denominators(self, ctx: _Context, *vals):
        for v in vals:
            if isinstance(v, RatFunc) and not v.den.is_constant():
                ctx.ledger.append(v.den)


# step kinds

def _mode(step: Step) -> str:
    for tok in step.mode_tokens:
        if tok in ("exact", "up_to_scalar", "multiple"):
            return tok
    return "up_to_scalar"


def _apply(res: StepResult, c: _Cmp):
    res.status = c.status
    res.scalar = c.scalar
    res.diff = c.diff
    if c.detail:
        res.detail = (res.detail + "; " if res.detail else "") + c.detail


def _settle_value(res: StepResult, recomputed, expected):
    if res.status in (MATCH, MATCH_UP_TO_SCALAR):
        res.value = expected
    else:
        res.value = _canonical(recomputed)


def _run_identity(engine: Engine, step: Step, ctx: _Context, res: StepResult):
    exprs, _ = split_inputs(step.inputs)
    val = ctx.evaluate(exprs[0])
    engine._note_denominators(ctx, val)
    res.value = val
    if RatFunc.lift(val).is_zero():
        res.status = MATCH
        res.detail = "identically zero"
        return
    p = RatFunc.lift(val).num
    res.status = MISMATCH
    res.diff = _term_diff(p, Poly.zero(p.table), 1)
    res.detail = f"not identically zero ({len(p)} terms remain)"


def _run_compare(engine: Engine, step: Step, ctx: _Context, res: StepResult):
    exprs, _ = split_inputs(step.inputs)
    rec = ctx.evaluate(exprs[0])
    exp = engine._expected(step.expected, ctx)
    engine._note_denominators(ctx, rec, exp)
    c = compare(rec, exp, _mode(step), ctx.allowed_factors())
    _apply(res, c)
    _settle_value(res, rec, exp)


def _run_multi(engine: Engine, step: Step, ctx: _Context, res: StepResult):
    exprs, _ = split_inputs(step.inputs)
    names = split_expected(step.expected)
    mode = _mode(step)
    scalar = None
    values = []
    problems = []
    for text, name in zip(exprs, names):
        rec = ctx.evaluate(text)
        exp = engine._expected(name, ctx)
        engine._note_denominators(ctx, rec, exp)
        x, y = _cross(rec, exp)
        values.append(rec)
        if mode == "exact":
            if x != y:
                problems.append(name)
                res.diff.extend(_term_diff(x, y, 1)[: MAX_DIFF - len(res.diff)])
            continue
        if scalar is None:
            if x.is_zero() or y.is_zero():
                if x != y:
                    problems.append(name)
                continue
            scalar = _lc_ratio(x, y)
        if x != y.scale(scalar):
            problems.append(name)
            res.diff.extend(_term_diff(x, y, scalar)[: MAX_DIFF - len(res.diff)])
    res.value = tuple(values)
    if problems:
        res.status = MISMATCH
        res.detail = "differs: " + ", ".join(problems)
        return
    if mode == "exact" or scalar in (None, 1):
        res.status = MATCH
        res.scalar = None if mode == "exact" else Fraction(1)
    else:
        res.status = MATCH_UP_TO_SCALAR
        res.scalar = Fraction(scalar)
    res.detail = f"{len(names)} values compared"


def _run_roots(engine: Engine, step: Step, ctx: _Context, res: StepResult):
    exprs, _ = split_inputs(step.inputs)
    val = _as_poly(ctx.evaluate(exprs[0]), "root-check input")
    res.value = val
    want = step.mode_value("roots")
    if val.is_zero():
        res.status = DEGENERATE
        res.detail = "polynomial is identically zero"
        return
    try:
        u = UniPoly.from_poly(val)
    except ValueError as exc:
        raise StepFailure(str(exc)) from None
    n = count_real_roots(u)
    st = structural_checks(u)
    var = ", ".join(val.variable_names()) or "-"
    parts = [f"polynomial in {var} of degree {u.degree}", f"real roots: {n}",
             f"all coefficients positive: {str(st.all_coeffs_positive).lower()}",
             f"exponents: {st.exponent_parity}", f"sign changes: {descartes_bound(u)}"]
    if step.expected:
        exp = engine._expected(step.expected, ctx)
        engine._note_denominators(ctx, exp)
        c = compare(val, exp, "up_to_scalar")
        if c.status in (MATCH, MATCH_UP_TO_SCALAR):
            parts.append(f"printed form agrees (scalar {format_coefficient(c.scalar)})")
        else:
            parts.append("printed form differs: " + format_poly(_canonical(val)))
            res.diff = c.diff
    res.detail = "; ".join(parts)
    if want is not None and n != int(want):
        res.status = MISMATCH
        res.detail += f"; expected {want} real roots"
        return
    res.status = MATCH


def _run_successive(engine: Engine, step: Step, ctx: _Context, res: StepResult):
    exprs, order = split_inputs(step.inputs)
    polys = [_as_poly(ctx.evaluate(e), f"input {i + 1}") for i, e in enumerate(exprs)]
    table = ctx.corpus.table
    if "differential" in step.mode_tokens:
        if len(polys) != 2 or ctx.derivation is None:
            raise StepFailure("differential elimination needs two inputs and a rule set")
        run = elim.differential_eliminate(polys[0], polys[1], [table.resolve(v) for v in order],
                                          ctx.derivation, strip=ctx.allowed_factors())
        res.certificate = "not applicable (differentiation)"
    else:
        run = elim.successive_eliminate(polys, [table.resolve(v) for v in order])
        if run.status == elim.OK:
            bad = [c for c in run.certificates() if not c.replay()]
            res.certificate = f"FAILED ({len(bad)})" if bad else f"verified ({len(run.survivors)})"
            if bad:
                res.status = MISMATCH
                res.detail = "cofactor certificate does not replay"
                return
    log = "; ".join(run.log)
    if run.status == elim.INCOMPLETE:
        res.status = INCOMPLETE
        res.detail = run.reason + (f" [{log}]" if log else "")
        return
    if run.status == elim.DEGENERATE:
        res.status = DEGENERATE
        res.detail = run.reason + (f" [{log}]" if log else "")
        return
    if "negative_control" in step.mode_tokens:
        res.status = MISMATCH
        res.detail = "negative control produced a nontrivial eliminant [" + log + "]"
        res.value = run.result
        return
    result = run.result
    res.value = result
    univ = step.mode_value("univariate")
    if univ is not None:
        vi = table.resolve(univ)
        extra = result.variables() - {vi}
        if extra or result.is_constant():
            res.status = MISMATCH
            res.detail = "eliminant is not a nonconstant polynomial in " + univ + ": " + \
                ", ".join(table.names[i] for i in sorted(extra))
            return
    if step.expected:
        exp = engine._expected(step.expected, ctx)
        c = compare(result, exp, _mode(step), ctx.allowed_factors())
        _apply(res, c)
        _settle_value(res, result, exp)
    else:
        res.status = MATCH
    res.detail = (res.detail + "; " if res.detail else "") + f"eliminant: {_summary(result)} [{log}]"


def _summary(p: Poly) -> str:
    text = format_poly(p)
    if len(text) <= 120:
        return text
    return f"{len(p)} terms, degree {p.degree()} in {', '.join(p.variable_names())}"


_KINDS = {
    "identity_zero": _run_identity,
    "derive_compare": _run_compare,
    "eliminate_compare": _run_compare,
    "substitute_compare": _run_compare,
    "expand_compare": _run_compare,
    "collect_coeffs_compare": _run_multi,
    "product_compare": _run_multi,
    "real_root_check": _run_roots,
    "successive_eliminate_check": _run_successive,
}


def run_step(step: Step, corpus: Corpus, options: RunOptions | None = None) -> StepResult:
    engine = Engine(corpus, options)
    return engine.run([step])[0]


def run_all(corpus: Corpus, pattern: str | None = None, options: RunOptions | None = None) -> list[StepResult]:
    engine = Engine(corpus, options)
    return engine.run(engine.select(pattern))
