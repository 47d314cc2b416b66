import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from rostering.model import build_instance, desk_instance, reference_instance  # noqa: E402

ACCEPTANCE_RESULTS = {}


@pytest.fixture(scope="session")
def ref():
    return reference_instance()


@pytest.fixture(scope="session")
def desk():
    return desk_instance()


@pytest.fixture(scope="session")
def tiny():
    """3 nurses x 7 days with the standard shift catalogue."""
    return build_instance(3, 7, n_head=1)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k[1:])):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {key}: {detail}")
