import time

import pytest

from biharm_verify import limits
from biharm_verify.parser import parse_poly


def test_term_cap(table):
    p = parse_poly("x + y + z + lam + lam' + lam''", table)
    with limits.capped(limits.Caps(term_cap=50, time_limit=60)):
        with pytest.raises(limits.ResourceExceeded) as info:
            p ** 4
    assert info.value.what == "term"


def test_no_caps_outside_block(table):
    p = parse_poly("x + y + z", table)
    assert len(p ** 6) == 28
    limits.check_time()


def test_stage_time():
    with limits.capped(limits.Caps(time_limit=0.01)):
        time.sleep(0.02)
        with pytest.raises(limits.ResourceExceeded) as info:
            limits.check_time()
    assert info.value.what == "stage time"


def test_stage_resets_budget_but_not_total():
    with limits.capped(limits.Caps(time_limit=0.05, total_limit=0.08)):
        time.sleep(0.04)
        with limits.stage():
            time.sleep(0.02)
            limits.check_time()  # fresh stage budget
            time.sleep(0.04)
            with pytest.raises(limits.ResourceExceeded) as info:
                limits.check_time()
    assert info.value.what == "total time"
