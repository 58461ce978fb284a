import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from doublephase import minimize_r1, minimize_r2, QuotientConfig  # noqa: E402
from doublephase.energy import default_problem  # noqa: E402

ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def problem():
    return default_problem()


@pytest.fixture(scope="session")
def cfg():
    return QuotientConfig()


@pytest.fixture(scope="session")
def upper(problem, cfg):
    """``minimize_r1`` on the default problem."""
    return minimize_r1(problem, cfg)


@pytest.fixture(scope="session")
def lower(problem, cfg):
    """``minimize_r2`` on the default problem."""
    return minimize_r2(problem, cfg)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
