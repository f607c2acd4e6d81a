"""One test per acceptance criterion; tolerances and time limits live in
imopt.acceptance and are shared with `imopt selftest`."""
import pytest

from imopt.acceptance import CHECKS, run_check


@pytest.mark.parametrize("number", [c[0] for c in CHECKS], ids=[f"{c[0]:02d}-{c[1]}" for c in CHECKS])
def test_criterion(number):
    res = run_check(number)
    print(res.line())
    if not res.asserted:
        return  # reported only; the line above carries the numbers
    assert res.passed, res.line()
    assert res.within_time, f"took {res.seconds:.2f}s, limit {res.limit}s"
