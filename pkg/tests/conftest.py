import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_acceptance_results = {}


def pytest_runtest_logreport(report):
    # Collect one outcome per acceptance criterion for the summary below.
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        _acceptance_results[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for name in sorted(_acceptance_results):
        outcome = _acceptance_results[name]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"  {name}: {status}")
