import pytest

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion_line():
    """Record the one-line pass/fail summary of an acceptance criterion."""
    def record(number: int, title: str, failures: list[str], seconds: float):
        status = "PASS" if not failures else "FAIL"
        detail = "; ".join(failures) if failures else "all checks met"
        line = f"criterion {number} [{status}] {title} ({seconds:.1f} s): {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
