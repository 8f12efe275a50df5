import numpy as np
import pytest

from qextract import functions as fm
from qextract.memory import prepare


@pytest.fixture(scope="session")
def bump():
    return fm.with_lambda(fm.normalize(fm.cosine_bump(0.5)))


@pytest.fixture(scope="session")
def flat():
    return fm.with_lambda(fm.normalize(fm.constant()))


@pytest.fixture
def const_mem():
    def make(n, a_psi=1.0):
        return prepare(fm.sample_grid(fm.constant(), n), a_psi)

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
