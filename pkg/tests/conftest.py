"""Shared pytest configuration: the acceptance criterion report."""

from collections import defaultdict

import pytest

_CRITERIA = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion this test checks")


def pytest_runtest_logreport(report):
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = "xfailed" if hasattr(report, "wasxfail") else report.outcome
        measured = dict(report.user_properties).get("measured", "")
        _CRITERIA[number].append((report.nodeid.split("::")[-1], outcome, measured))


@pytest.fixture(autouse=True)
def _tag_criterion(request, record_property):
    marker = request.node.get_closest_marker("criterion")
    if marker is not None:
        record_property("criterion", marker.args[0])
        record_property("title", marker.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        results = _CRITERIA[number]
        failed = [name for name, outcome, _ in results if outcome == "failed"]
        xfailed = [name for name, outcome, _ in results if outcome == "xfailed"]
        verdict = "FAIL" if failed else "PASS"
        counts = f"{sum(o == 'passed' for _, o, _ in results)} passed"
        if xfailed:
            counts += f", {len(xfailed)} known shortfall(s): {', '.join(xfailed)}"
        if failed:
            counts += f", failed: {', '.join(failed)}"
        tr.write_line(f"criterion {number}: {verdict} ({counts})")
        for name, outcome, measured in results:
            if measured:
                tr.write_line(f"    {name} [{outcome}] {measured}")
