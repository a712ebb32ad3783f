import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240915)


def pytest_terminal_summary(terminalreporter):
    """Echo bridge verdicts after the run, outside output capture."""
    import bridge_verdicts
    if bridge_verdicts.LINES:
        terminalreporter.section("bridge verdicts")
        for line in bridge_verdicts.LINES:
            terminalreporter.write_line(line)
