import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None and (report.when == "call" or report.failed):
        number, title = mark.args
        entry = _CRITERIA.setdefault(number, {"title": title, "passed": True, "failures": []})
        if report.failed:
            entry["passed"] = False
            entry["failures"].append(item.name)
    return report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["passed"] else "FAIL"
        line = f"criterion {number:>2} {status}  {entry['title']}"
        if entry["failures"]:
            line += f"  (failed: {', '.join(entry['failures'])})"
        terminalreporter.write_line(line)
