import sys

import numpy as np
import pytest

from varthresh import simulate_linear

# Shared simulation design: Y = 1 + 0.5 x1 + 1.0 x2 + eps.
GAMMA0 = 1.0
GAMMA = (0.5, 1.0)


@pytest.fixture(scope="session")
def sim1000():
    return simulate_linear(1000, GAMMA0, GAMMA, 1.0, seed=11)


@pytest.fixture(scope="session")
def sim200():
    return simulate_linear(200, GAMMA0, GAMMA, 1.0, seed=5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        terminalreporter.write_line(lines[key])
