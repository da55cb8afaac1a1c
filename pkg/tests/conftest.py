from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
from hypothesis import settings, strategies as st

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def rel_err(a, b) -> mpmath.mpf:
    """Relative difference computed at 70 digits, independent of the library."""
    with mpmath.workdps(70):
        a = mpmath.mpf(a.numerator) / a.denominator if isinstance(a, Fraction) else mpmath.mpf(a)
        b = mpmath.mpf(b.numerator) / b.denominator if isinstance(b, Fraction) else mpmath.mpf(b)
        scale = max(abs(a), abs(b), mpmath.mpf(1) / 10**60)
        return abs(a - b) / scale


def mp(x) -> mpmath.mpf:
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def rationals(lo=-5, hi=5, max_den=12, nonzero=False):
    s = st.fractions(min_value=lo, max_value=hi, max_denominator=max_den)
    return s.filter(lambda x: x != 0) if nonzero else s


@pytest.fixture(autouse=True)
def _oracle_precision():
    with mpmath.workdps(70):
        yield


def close(a, b, tol=mpmath.mpf(10) ** -30) -> bool:
    """Relative agreement, falling back to absolute agreement near zero."""
    with mpmath.workdps(70):
        return abs(mp(a) - mp(b)) <= tol * max(abs(mp(a)), abs(mp(b)), 1)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
