from __future__ import annotations

import pytest

_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record a one-line pass/fail verdict for the acceptance summary."""
    def record(number: int, name: str, ok: bool, detail: str) -> bool:
        line = f"criterion {number} [{name}]: {'PASS' if ok else 'FAIL'} ({detail})"
        _LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
