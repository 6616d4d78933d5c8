"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from collections import defaultdict

import pytest

_OUTCOMES = defaultdict(list)
_TITLES = {}
_MEASURED = defaultdict(list)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    _TITLES[number] = title
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _OUTCOMES[number].append(report.passed)
        _MEASURED[number].extend(v for k, v in item.user_properties if k == "measured")


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        status = "PASS" if all(_OUTCOMES[number]) else "FAIL"
        line = f"criterion {number:2d} {status}  {_TITLES[number]}"
        if _MEASURED[number]:
            line += "  [" + "; ".join(_MEASURED[number]) + "]"
        terminalreporter.write_line(line)
