import numpy as np
import pytest

from opencavity import spectrum
from opencavity.config import load_config
from opencavity.dipole import DipolePair


@pytest.fixture(scope="session")
def cfg():
    return load_config()


@pytest.fixture(scope="session")
def grid():
    return spectrum.default_grid()


@pytest.fixture(scope="session")
def dipoles():
    return DipolePair.from_measurement(49.0, 0.58, 1.5, 77.0)


@pytest.fixture(scope="session")
def doublet(dipoles):
    split = spectrum.doublet_splitting_nm(637.0, 1.5)
    return spectrum.EmitterModel.doublet((637.0 - split, 637.0), 0.4, dipoles.branching, 0.044)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
