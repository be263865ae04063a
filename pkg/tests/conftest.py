import pytest

_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance verdict; the lines are repeated in the terminal summary."""

    def record(number, label, ok, detail=""):
        # ok=None marks a diagnostic line that gates nothing
        status = "INFO" if ok is None else "PASS" if ok else "FAIL"
        line = f"[{status}] criterion {number}: {label}" + (f" ({detail})" if detail else "")
        _LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
