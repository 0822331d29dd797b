import numpy as np
import pytest

from spherepack.construction import build_d600, build_pn, build_sigma
from spherepack.packing import build_nerve, exterior_pole, project_packing

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def D():
    return build_d600()


@pytest.fixture(scope="session")
def seed(D):
    return build_sigma(D)


@pytest.fixture(scope="session")
def P10(seed):
    return build_pn(seed, 10, "direct")[0]


@pytest.fixture(scope="session")
def P10_r3(seed, P10):
    return project_packing(P10, -seed.b)


@pytest.fixture(scope="session")
def D_r3(D):
    return project_packing(D, exterior_pole(D))


@pytest.fixture(scope="session")
def D_nerve(D):
    return build_nerve(D)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
