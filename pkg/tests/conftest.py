import numpy as np
import pytest

from bilayer_kpm.lattice import lattice_constants

GOLDEN = (1 + 5 ** 0.5) / 2

# filled by the acceptance suite, echoed at the end of the run
ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def golden_lattice():
    return lattice_constants(GOLDEN)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
