import numpy as np
import pytest

from anisope.domain import Grid, Params, Parity, ScalarField
from anisope.initial import random_bandlimited


def field(grid, fn, parity=Parity.NONE):
    return ScalarField.from_function(grid, fn, parity)


def sin2pi(a):
    return np.sin(2 * np.pi * a)


def cos2pi(a):
    return np.cos(2 * np.pi * a)


@pytest.fixture
def grid16():
    return Grid(16, 16, 16)


@pytest.fixture
def grid16_h():
    return Grid(16, 16, 16, h=0.7)


@pytest.fixture
def params():
    return Params()


@pytest.fixture
def random_state(grid16):
    return random_bandlimited(grid16, seed=3)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
