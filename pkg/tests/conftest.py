import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_RESULTS = {}


@pytest.fixture
def acceptance():
    """Record one acceptance criterion; the summary hook prints them in order."""

    def record(number, title, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} [{number}] {title}: {detail}"
        _RESULTS[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        terminalreporter.write_line(_RESULTS[number])
