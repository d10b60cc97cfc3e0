"""Shared pytest configuration: acceptance-criteria summary lines."""

_ACCEPTANCE_PREFIX = "tests/test_acceptance.py::test_criterion_"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one PASS/FAIL line per acceptance criterion after the run."""
    lines = {}
    for status, outcome in (("passed", "PASS"), ("failed", "FAIL"),
                            ("xfailed", "FAIL (expected)"),
                            ("xpassed", "UNEXPECTED PASS"),
                            ("error", "ERROR")):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::test_criterion_" in nodeid:
                name = nodeid.split("::")[-1]
                lines[name] = f"{outcome:16s} {name}"
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name in sorted(lines):
            terminalreporter.write_line(lines[name])
