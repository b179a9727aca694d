"""``verify`` command line driver.

Exit codes: 0 all good, 1 some MISMATCH (or a DEGENERATE outside the
negative controls), 2 some non-extended step INCOMPLETE, 3 bad input.
"""
from __future__ import annotations

import argparse
import sys

from . import limits
from .corpus import CorpusError, load_corpus
from .parser import ParseError
from .poly import ExponentOverflow
from .report import emit_report
from .steps import DEGENERATE, INCOMPLETE, MISMATCH, Engine, RunOptions


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="verify", description="Replay and check the registered algebra steps.")
    sel = ap.add_mutually_exclusive_group()
    sel.add_argument("--all", action="store_true", help="run every registered step (default)")
    sel.add_argument("--step", metavar="ID", action="append", help="run one step (repeatable)")
    sel.add_argument("--filter", metavar="GLOB", help="run steps whose id matches the glob")
    sel.add_argument("--list", action="store_true", help="list step ids with anchors and exit")
    ap.add_argument("--corpus", metavar="DIR", help="corpus directory (default: the bundled one)")
    ap.add_argument("--report", choices=("json", "text"), default="text")
    ap.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    ap.add_argument("--time-limit", type=float, default=limits.DEFAULT_TIME_LIMIT, metavar="S",
                    help="per-stage time limit in seconds (default %(default)s)")
    ap.add_argument("--term-cap", type=int, default=limits.DEFAULT_TERM_CAP, metavar="N",
                    help="maximum terms in an intermediate polynomial (default %(default)s)")
    ap.add_argument("--include-extended", action="store_true", help="also run extended steps")
    ap.add_argument("--jobs", type=int, default=1, metavar="N", help="run independent steps concurrently")
    ap.add_argument("--timings", action="store_true",
                    help="record runtimes in the report (makes reports non-reproducible)")
    return ap


def exit_code(results) -> int:
    if any(r.status == MISMATCH for r in results):
        return 1
    if any(r.status == DEGENERATE and not r.negative_control for r in results):
        return 1
    if any(r.negative_control and r.status != DEGENERATE for r in results):
        return 1
    if any(r.status == INCOMPLETE for r in results):
        return 2
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 3
    if args.time_limit < 1:
        print("verify: --time-limit must be at least 1", file=sys.stderr)
        return 3
    if args.term_cap < 1000:
        print("verify: --term-cap must be at least 1000", file=sys.stderr)
        return 3
    if args.jobs < 1:
        print("verify: --jobs must be at least 1", file=sys.stderr)
        return 3
    try:
        corpus = load_corpus(args.corpus)
    except (CorpusError, ParseError, ExponentOverflow) as exc:
        print(f"verify: {exc}", file=sys.stderr)
        return 3
    if args.list:
        for s in corpus.steps:
            print(f"{s.id}\t{s.kind}\t{s.anchor}")
        return 0
    options = RunOptions(args.time_limit, args.term_cap, args.include_extended, args.jobs, args.timings)
    engine = Engine(corpus, options)
    if args.step:
        known = {s.id for s in corpus.steps}
        missing = [s for s in args.step if s not in known]
        if missing:
            print(f"verify: unknown step id: {', '.join(missing)}", file=sys.stderr)
            return 3
        chosen = engine.select(ids=args.step)
    else:
        chosen = engine.select(args.filter)
    results = engine.run(chosen)
    text = emit_report(results, args.report)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            sys.stdout.write(text)
            print(f"verify: cannot write {args.out}: {exc}", file=sys.stderr)
            return 3
    else:
        sys.stdout.write(text)
    return exit_code(results)


if __name__ == "__main__":
    sys.exit(main())
