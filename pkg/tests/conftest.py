import pytest

_CRITERION_LINES = []


@pytest.fixture(scope="session")
def criterion_report():
    """Collector for acceptance-criterion result lines (shown after the run)."""

    def record(line):
        print(line)
        _CRITERION_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERION_LINES):
            terminalreporter.write_line(line)
