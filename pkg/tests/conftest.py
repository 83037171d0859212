"""Shared pytest plumbing: a recorder that prints one summary line per
top-level verification result at the end of the run."""

import pytest

_summary_lines = []


@pytest.fixture
def summary_line():
    """Record a single PASS/FAIL line shown in the terminal summary."""

    def record(name: str, ok: bool, detail: str) -> None:
        _summary_lines.append(
            f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _summary_lines:
        terminalreporter.write_sep("-", "verification summary")
        for line in _summary_lines:
            terminalreporter.write_line(line)
