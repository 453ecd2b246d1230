import numpy as np
import pytest

from fsir.basis import BasisSpec
from fsir.simulate import ExampleSpec, oracle_kernels

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def basis200():
    return BasisSpec("cosine", 200, 512)


@pytest.fixture(scope="session")
def basis50():
    return BasisSpec("cosine", 50, 512)


@pytest.fixture(scope="session")
def binary_model(basis200):
    """Binary model with alpha = 1, delta = 0.5, N = 200: (spec, Gw, Ge, G)."""
    spec = ExampleSpec("binary", 1.0, 0.5, 200)
    return (spec, *oracle_kernels(spec, basis200))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
