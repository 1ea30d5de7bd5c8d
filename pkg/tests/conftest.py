"""Shared test plumbing: the acceptance-criteria summary block.

Acceptance tests record one line per criterion through ``record_criterion``;
the lines are echoed in the terminal summary so the verdicts and reported
values stay visible even when pytest captures stdout.
"""

CRITERION_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> str:
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {detail}"
    CRITERION_LINES.append(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(CRITERION_LINES):
        terminalreporter.write_line(line)
