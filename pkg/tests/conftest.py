import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_acceptance_lines = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else "FAIL"
    _acceptance_lines.append(f"[ACCEPTANCE] {status} {name}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.write_line("")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
