import numpy as np
import pytest

from porous_carnot.group import heisenberg_spec

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def H():
    return heisenberg_spec()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
