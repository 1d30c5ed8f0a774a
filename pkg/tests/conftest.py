import sys

# one line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k[2:])):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


def record(key: str, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} {key}: {detail}"
    ACCEPTANCE_LINES[key] = line
    print(line, file=sys.stderr)
