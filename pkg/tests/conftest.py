import pytest

_RESULTS = {}


@pytest.fixture
def acceptance():
    """Record one verdict line per acceptance criterion."""
    def record(number, ok, detail):
        _RESULTS[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_RESULTS[number])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        terminalreporter.write_line(_RESULTS[number])
