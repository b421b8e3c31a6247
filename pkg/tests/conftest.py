"""Shared pytest plumbing for the acceptance report.

Criterion verdict lines are collected while the acceptance tests run and
echoed in a terminal-summary section, so they are visible in plain
``pytest -v`` output without -s even when every criterion passes.
"""

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one 'ACCEPTANCE <n> PASS|FAIL: detail' line, then assert."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"ACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
