import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def centered(rng, C, n, scale=1.0, mean=0.0):
    F = rng.normal(size=(C, n)) * scale + mean
    return F - F.mean(axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
