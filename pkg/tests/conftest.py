import os
import sys
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from bllab.core import IntervalUnion, builtin_config  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# one pass/fail line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def rationals(lo=-4, hi=4, dens=(1, 2, 4, 8)):
    return st.sampled_from(dens).flatmap(
        lambda d: st.integers(lo * d, hi * d).map(lambda k: Fraction(k, d)))


@st.composite
def interval_unions(draw, max_components=3, lo=-4, hi=4, positive=True):
    k = draw(st.integers(1 if positive else 0, max_components))
    pts = sorted(draw(st.lists(rationals(lo, hi), min_size=2 * k, max_size=2 * k)))
    u = IntervalUnion.from_pairs([(pts[2 * i], pts[2 * i + 1]) for i in range(k)])
    if positive and u.measure == 0:
        u = IntervalUnion.from_pairs([(pts[0], pts[0] + 1)])
    return u


@pytest.fixture(scope="session")
def rs():
    return builtin_config("riesz-sobolev")


@pytest.fixture(scope="session")
def gowers2():
    return builtin_config("gowers", k=2)
