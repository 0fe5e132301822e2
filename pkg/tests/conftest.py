import numpy as np
import pytest

from mubwitness.haar import SamplerConfig, sample_block

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_unitaries(d, count, seed=0):
    return sample_block(SamplerConfig(d, seed), 0, count)


def random_complex(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


@pytest.fixture
def fourier6():
    w = np.exp(2j * np.pi / 6)
    return np.array([[w ** (j * k) for k in range(6)] for j in range(6)]) / np.sqrt(6)
