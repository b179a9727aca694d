from fractions import Fraction

import pytest

import minicorpus
from biharm_verify import RunOptions, load_corpus, run_all, run_step
from biharm_verify.parser import parse_poly, parse_value
from biharm_verify.steps import (DEGENERATE, INCOMPLETE, MATCH, MATCH_UP_TO_SCALAR, MISMATCH, SKIPPED,
                                 Engine, compare, natural_key)


def P(table, s):
    return parse_poly(s, table)


def test_natural_key_orders_numbers():
    ids = ["E.21", "E.3", "E.11", "A.F9", "A.F10"]
    assert sorted(ids, key=natural_key) == ["A.F9", "A.F10", "E.3", "E.11", "E.21"]


class TestCompare:
    def test_exact(self, table):
        assert compare(P(table, "x + y"), P(table, "y + x"), "exact").status == MATCH
        c = compare(P(table, "2*x"), P(table, "x"), "exact")
        assert c.status == MISMATCH and c.scalar == 2
        c = compare(P(table, "x + y"), P(table, "x - y"), "exact")
        assert c.status == MISMATCH
        assert ("y", "1", "-1") in c.diff

    def test_exact_rational_cross_multiplies(self, table):
        a = parse_value("x/(2*y)", table)
        b = parse_value("(x*y)/(2*y^2)", table)
        assert compare(a, b, "exact").status == MATCH

    def test_up_to_scalar(self, table):
        c = compare(P(table, "-4*x + 6*y"), P(table, "2*x - 3*y"), "up_to_scalar")
        assert c.status == MATCH
        c = compare(P(table, "x - y"), P(table, "3*x - 3*y"), "up_to_scalar")
        assert c.status == MATCH_UP_TO_SCALAR and c.scalar == Fraction(1, 3)

    def test_up_to_scalar_strips_nonvanishing(self, table):
        lam = P(table, "lam")
        c = compare(P(table, "lam^2*(x - y)"), P(table, "x - y"), "up_to_scalar", [lam])
        assert c.status == MATCH_UP_TO_SCALAR
        assert "nonvanishing" in c.detail
        c = compare(P(table, "x*(x - y)"), P(table, "x - y"), "up_to_scalar", [lam])
        assert c.status == MISMATCH

    def test_up_to_scalar_zero_is_degenerate(self, table):
        c = compare(P(table, "0"), P(table, "x"), "up_to_scalar")
        assert c.status == DEGENERATE

    def test_multiple(self, table):
        allowed = [P(table, "lam"), P(table, "x")]
        c = compare(P(table, "-2*lam*x*(y + 1)"), P(table, "y + 1"), "multiple", allowed)
        assert c.status == MATCH_UP_TO_SCALAR and c.scalar == -2
        c = compare(P(table, "y*(y + 1)"), P(table, "y + 1"), "multiple", allowed)
        assert c.status == MISMATCH
        c = compare(P(table, "y^2 + 2"), P(table, "y + 1"), "multiple", allowed)
        assert c.status == MISMATCH


@pytest.fixture
def mini(tmp_path):
    return load_corpus(minicorpus.write(tmp_path))


def test_mini_corpus_statuses(mini):
    res = {r.id: r for r in run_all(mini)}
    assert res["S.zero"].status == MATCH
    assert res["S.res"].status == MATCH
    assert res["S.exact"].status == MATCH_UP_TO_SCALAR and res["S.exact"].scalar == Fraction(1, 2)
    assert res["S.root"].status == MATCH
    assert res["S.chain"].status == MATCH
    assert res["S.neg"].status == DEGENERATE and res["S.neg"].ok
    assert all(r.ok for r in res.values())


def test_denominators_are_ledgered(mini):
    r = run_step(mini.step("S.der"), mini)
    assert r.status == MATCH
    assert [str(d) for d in r.denominators] == ["lam^2"]


def test_uncovered_denominator_is_mismatch(tmp_path):
    files = dict(minicorpus.FILES)
    files["nonvanishing.txt"] = "x\n"
    c = load_corpus(minicorpus.write(tmp_path, files))
    r = run_step(c.step("S.der"), c)
    assert r.status == MISMATCH
    assert "nonvanishing" in r.detail


def test_wrong_expected_gives_diff(tmp_path):
    files = dict(minicorpus.FILES)
    files["eq/R.poly"] = "y - 2\n"
    c = load_corpus(minicorpus.write(tmp_path, files))
    r = run_step(c.step("S.res"), c)
    assert r.status == MISMATCH
    assert r.diff


def test_root_count_mismatch(tmp_path):
    rows = [("S.r", "real_root_check", "{R}", "-", "roots=2", "-", "-", "a")]
    c = load_corpus(minicorpus.write(tmp_path, rows=rows))
    assert run_step(c.step("S.r"), c).status == MISMATCH


def test_negative_control_not_degenerate_fails(tmp_path):
    rows = [("S.n", "successive_eliminate_check", "{A}; {B} >> x", "-", "negative_control", "-", "-", "a")]
    c = load_corpus(minicorpus.write(tmp_path, rows=rows))
    r = run_step(c.step("S.n"), c)
    assert r.negative_control and not r.ok


def test_term_cap_gives_incomplete(tmp_path):
    files = dict(minicorpus.FILES)
    files["eq/Big.poly"] = "(x + y + lam + lam' + lam'' + u + 1)^3\n"
    rows = [("S.big", "expand_compare", "{Big}^3", "Big", "up_to_scalar", "-", "terms=1000", "a")]
    c = load_corpus(minicorpus.write(tmp_path, files, rows))
    r = run_step(c.step("S.big"), c)
    assert r.status == INCOMPLETE
    assert "term cap" in r.detail


def test_extended_steps_skipped_by_default(tmp_path):
    rows = [("S.e", "identity_zero", "{Z}", "-", "-", "-", "extended", "a")]
    c = load_corpus(minicorpus.write(tmp_path, rows=rows))
    assert run_step(c.step("S.e"), c).status == SKIPPED
    assert run_step(c.step("S.e"), c, RunOptions(include_extended=True)).status == MATCH


def test_filter_runs_dependencies_but_reports_selection(mini):
    eng = Engine(mini)
    out = eng.run(eng.select("S.chain"))
    assert [r.id for r in out] == ["S.chain"]
    assert "S.res" in eng.results


def test_pipeline_override(tmp_path):
    files = dict(minicorpus.FILES)
    files["eq/R.poly"] = "y - 2\n"
    rows = [
        ("S.res", "eliminate_compare", "res({A}, {B}, x)", "R", "up_to_scalar", "-", "-", "a"),
        ("S.use", "identity_zero", "{R} - y + 1", "-", "-", "-", "-", "b"),
    ]
    c = load_corpus(minicorpus.write(tmp_path, files, rows))
    res = {r.id: r for r in run_all(c)}
    assert res["S.res"].status == MISMATCH
    # transcribed R is wrong, but the recomputed upstream value makes S.use hold
    assert res["S.use"].status == MISMATCH
    assert res["S.use"].pipeline_status == MATCH


def test_runtime_only_with_timings(mini):
    assert run_step(mini.step("S.zero"), mini).runtime_ms is None
    assert run_step(mini.step("S.zero"), mini, RunOptions(timings=True)).runtime_ms is not None


def test_jobs_do_not_change_results(corpus):
    a = run_all(corpus, "E.*")
    b = run_all(corpus, "E.*", RunOptions(jobs=4))
    assert [(r.id, r.status, r.scalar) for r in a] == [(r.id, r.status, r.scalar) for r in b]
