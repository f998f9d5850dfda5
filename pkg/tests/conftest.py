import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sodestimator import ContinuousLTI, discretize

PAPER_A = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0, -6.0, -35.5, -15.0],
    ]
)
PAPER_C = np.array([[-2.0, 4.0, 0.0, 3.0], [0.0, 10.0, 0.0, 1.0]])
PAPER_X0 = np.array([10.0, 3.0, -4.0, 5.0])


@pytest.fixture
def paper_model():
    return ContinuousLTI(PAPER_A, PAPER_C, 0.1, 0.36)


@pytest.fixture
def paper_discrete(paper_model):
    return discretize(paper_model, 1e-4)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
