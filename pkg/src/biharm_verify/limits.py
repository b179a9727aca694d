"""Resource caps shared by the algebra kernel.

Caps live in a context variable so that concurrent steps each carry their
own limits without threading them through every arithmetic call.
"""
from __future__ import annotations

import contextlib
import contextvars
import time
from dataclasses import dataclass

DEFAULT_TERM_CAP = 2_000_000
DEFAULT_TIME_LIMIT = 120.0


class ResourceExceeded(Exception):
    """An intermediate result outgrew the active caps."""

    def __init__(self, what: str, limit):
        super().__init__(f"{what} cap exceeded (limit {limit})")
        self.what = what
        self.limit = limit


@dataclass(frozen=True)
class Caps:
    term_cap: int = DEFAULT_TERM_CAP
    time_limit: float = DEFAULT_TIME_LIMIT  # per stage
    total_limit: float | None = None  # whole block, if set


@dataclass(frozen=True)
class _Active:
    caps: Caps
    deadline: float | None
    hard: float | None = None


_active: contextvars.ContextVar[_Active] = contextvars.ContextVar(
    "biharm_verify_caps", default=_Active(Caps(), None)
)


def _deadline(now: float, caps: Caps, hard: float | None) -> float:
    d = now + caps.time_limit
    return d if hard is None else min(d, hard)


@contextlib.contextmanager
def capped(caps: Caps):
    """Run the enclosed block under ``caps``; the clock starts on entry."""
    now = time.monotonic()
    hard = None if caps.total_limit is None else now + caps.total_limit
    token = _active.set(_Active(caps, _deadline(now, caps, hard), hard))
    try:
        yield
    finally:
        _active.reset(token)


@contextlib.contextmanager
def stage():
    """Give one stage of a multi-stage procedure a fresh time budget (never past the total)."""
    cur = _active.get()
    if cur.deadline is None:
        yield
        return
    token = _active.set(_Active(cur.caps, _deadline(time.monotonic(), cur.caps, cur.hard), cur.hard))
    try:
        yield
    finally:
        _active.reset(token)


def check_terms(n: int) -> None:
    cur = _active.get()
    if n > cur.caps.term_cap:
        raise ResourceExceeded("term", cur.caps.term_cap)


def check_time() -> None:
    cur = _active.get()
    if cur.deadline is None:
        return
    now = time.monotonic()
    if now > cur.deadline:
        if cur.hard is not None and now > cur.hard:
            raise ResourceExceeded("total time", f"{cur.caps.total_limit}s")
        raise ResourceExceeded("stage time", f"{cur.caps.time_limit}s")
