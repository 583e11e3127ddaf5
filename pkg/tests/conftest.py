import json
import os

import numpy as np
import pytest

from qtorus import ThetaMatrix

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(os.path.dirname(HERE), "fixtures")
GOLDEN = (np.sqrt(5) - 1) / 2

ACCEPTANCE_LINES = []


def record(criterion, ok, detail=""):
    """Log one acceptance line; printed again in the terminal summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def frozen():
    with open(os.path.join(HERE, "data", "frozen.json")) as fh:
        return json.load(fh)


def fixture_path(name):
    return os.path.join(FIXTURES, name + ".json")


def theta2(t=GOLDEN):
    return ThetaMatrix([[0.0, t], [-t, 0.0]])


def theta3():
    return ThetaMatrix.from_pairs(3, {(1, 2): GOLDEN, (1, 3): np.sqrt(2) - 1, (2, 3): 0.3})


@pytest.fixture
def t1():
    return ThetaMatrix.zero(1)


@pytest.fixture
def t2():
    return theta2()


@pytest.fixture
def t3():
    return theta3()
