from __future__ import annotations

import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from selfsim import catalog  # noqa: E402


@pytest.fixture(scope="session")
def adding():
    return catalog.adding_machine()


@pytest.fixture(scope="session")
def basil():
    return catalog.basilica()


@pytest.fixture(scope="session")
def grig():
    return catalog.grigorchuk()


@pytest.fixture(scope="session")
def mother2():
    return catalog.mother_group(2)


@pytest.fixture(scope="session")
def mother3():
    return catalog.mother_group(3)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
