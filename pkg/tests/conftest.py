import sys
from pathlib import Path

import numpy as np
import pytest

from reprune import kernels

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(params=["numpy", "numba"])
def backend(request):
    """Run a test once per compute backend, restoring the default after."""
    name = request.param
    if name not in kernels.available_backends():
        pytest.skip(f"{name} backend unavailable")
    previous = kernels.BACKEND
    kernels.use_backend(name)
    yield name
    kernels.use_backend(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(20240915)


def pytest_terminal_summary(terminalreporter):
    """Echo acceptance verdicts after the run, outside output capture."""
    import verdicts

    if verdicts.LINES:
        terminalreporter.section("acceptance verdicts")
        for line in verdicts.LINES:
            terminalreporter.write_line(line)
