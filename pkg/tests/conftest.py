import re

# keyed by (criterion number, test name) so split criteria keep one line each
_CRITERIA: dict[tuple[int, str], tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_criterion_(\d+)\w*", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(0))
    detail = dict(report.user_properties).get("detail", "")
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if report.passed:
            outcome = "PASS"
        elif hasattr(report, "wasxfail"):
            outcome = "FAIL (expected, see decisions ledger)"
        elif report.skipped:
            outcome = "SKIP"
        else:
            outcome = "FAIL"
        _CRITERIA[key] = (outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        outcome, detail = _CRITERIA[key]
        number = key[0]
        terminalreporter.write_line(f"criterion {number:2d}: {outcome:5s} {detail}")
