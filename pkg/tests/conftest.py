"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, clause): acceptance criterion clause")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    n, clause = marker.args
    detail = dict(item.user_properties).get("detail", "")
    _RESULTS.setdefault(n, []).append((clause, report.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_RESULTS):
        clauses = _RESULTS[n]
        ok = all(p for _, p, _ in clauses)
        tr.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}")
        for clause, passed, detail in clauses:
            tr.write_line(f"    {'pass' if passed else 'FAIL'}  {clause}: {detail}")


@pytest.fixture
def detail(record_property):
    """Attach a one-line measurement summary to the current acceptance clause."""
    def note(text):
        record_property("detail", text)
        print(text)
    return note
