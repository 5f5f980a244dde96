"""Per-criterion pass/fail report for tests/test_acceptance.py."""
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_results: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def detail(request):
    """Attach a one-line measurement to the criterion summary."""
    notes = []
    request.node.user_properties.append(("detail", notes))
    return notes.append


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    mark = next((v for k, v in report.user_properties if k == "criterion"), None)
    if mark is None:
        return
    notes = next((v for k, v in report.user_properties if k == "detail"), [])
    number, title = mark
    ok = report.passed
    prev = _results.get(number)
    if prev is not None:
        ok = ok and prev[1]
        notes = prev[2] + list(notes)
    _results[number] = (title, ok, list(notes))


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", tuple(m.args)))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, ok, notes = _results[number]
        line = f"criterion {number:2d}  {'PASS' if ok else 'FAIL'}  {title}"
        if notes:
            line += "  [" + "; ".join(notes) + "]"
        terminalreporter.write_line(line)
