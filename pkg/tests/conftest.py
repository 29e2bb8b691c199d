"""Shared fixtures for the test suite.

The skewed-twin systems are used by almost every test module, so their
distance chains are computed once per session.  Acceptance tests append
their one-line verdicts to ACCEPTANCE_LINES; the terminal summary hook
prints them after the run so they stay visible under output capture.
"""

from fractions import Fraction

import pytest

from ptsm import behavioural_distance, skewed_twin

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def twin_quarter():
    return skewed_twin(Fraction(1, 4))


@pytest.fixture(scope="session")
def twin_chain_w(twin_quarter):
    return behavioural_distance(twin_quarter, None, 3, method="W")


@pytest.fixture(scope="session")
def twin_chain_k(twin_quarter):
    return behavioural_distance(twin_quarter, None, 3, method="K")
