import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from beamsense.propagation import Scenario  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture
def scenario():
    return Scenario()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
