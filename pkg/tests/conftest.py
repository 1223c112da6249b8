import os

import pytest
from hypothesis import HealthCheck, settings

from dce_cavity.mode_solver import CavityGeometry, PermittivityPair

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def cube():
    return CavityGeometry(1.0, 1.0, 1.0, 0.01)


@pytest.fixture
def slab_eps():
    # eps_II / eps_I = 2
    return PermittivityPair(0.5, 1.0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
