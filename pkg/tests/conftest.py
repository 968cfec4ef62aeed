"""Shared pytest plumbing for the acceptance suite.

The acceptance tests each publish one verdict line; emitting them in the
terminal summary keeps them visible even though pytest captures stdout
during the tests themselves.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance verdicts")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
