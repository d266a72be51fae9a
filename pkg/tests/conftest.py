import pytest

_REPORT = []


@pytest.fixture(scope="session")
def report():
    """Collects one line per acceptance criterion for the terminal summary."""

    def add(label, ok, detail):
        _REPORT.append(f"{label}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return add


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
