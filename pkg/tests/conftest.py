import sys
from pathlib import Path

import numpy as np
import pytest

from loopdesc import _backend

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(params=_backend.available())
def backend(request):
    """Every kernel backend importable in this environment."""
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_LINES = []


@pytest.fixture
def acceptance_lines():
    return _LINES


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
