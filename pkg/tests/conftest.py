import time

import pytest

_RESULTS = {}
_START = []


def pytest_sessionstart(session):
    _START.append(time.perf_counter())


@pytest.fixture
def acceptance():
    """Record one summary line per acceptance criterion: ``acceptance(n, ok, detail)``."""

    def record(number, ok, detail):
        _RESULTS[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        ok, detail = _RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    elapsed = time.perf_counter() - _START[0]
    terminalreporter.write_line(
        f"suite runtime: {elapsed:.1f} s ({'PASS' if elapsed < 60 else 'FAIL'} against the 60 s budget)"
    )
