import pytest

_CRITERION_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL line per acceptance criterion and enforce it."""

    def report(number, ok, text):
        status = "PASS" if ok else "FAIL"
        line = f"ACCEPTANCE {number:>2}: {status} - {text}"
        _CRITERION_LINES.append(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERION_LINES):
            terminalreporter.write_line(line)
