import pytest

from cwsketch.variates import VariateScheme

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one acceptance line and fail the test if the criterion failed."""

    def _report(number: int, passed: bool, detail: str):
        line = f"[{number:>2}] {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return _report


@pytest.fixture
def scheme():
    return VariateScheme(20240611, 256)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
