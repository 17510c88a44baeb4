import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Collects one summary line per acceptance criterion."""

    def add(line: str) -> None:
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return add


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
