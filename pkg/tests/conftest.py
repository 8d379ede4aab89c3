import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gmsteady import ExponentConfig, build_barriers, build_grid  # noqa: E402

EXPONENT_SETS = [(0.4, 0.2, 0.4, 0.2), (0.3, 0.3, 0.3, 0.3), (0.5, 0.1, 0.45, 0.15)]

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(k, passed, detail)``."""
    def record(k, passed, detail=""):
        _CRITERIA[k] = (bool(passed), detail)
        print(f"criterion {k}: {'PASS' if passed else 'FAIL'} {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        ok, detail = _CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def grid129():
    return build_grid(1, (0.0, 1.0), 129)


@pytest.fixture(scope="session")
def barriers129(grid129):
    return {e: build_barriers(grid129, ExponentConfig(*e)) for e in EXPONENT_SETS}
