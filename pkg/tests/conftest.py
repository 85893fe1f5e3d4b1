import numpy as np
import pytest

from immi.model import ChannelRealization

ACCEPTANCE_LINES = []


def random_channel(rng, r, t):
    h = (rng.standard_normal((r, t)) + 1j * rng.standard_normal((r, t))) / np.sqrt(2)
    return ChannelRealization(h)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
