import collections

import pytest

pytest.register_assert_rewrite("properties")

_RESULTS = collections.defaultdict(list)
_CRITERIA = range(1, 8)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): test belongs to numbered acceptance criterion n")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criteria", mark.args))


def pytest_runtest_logreport(report):
    criteria = dict(report.user_properties).get("criteria", ())
    if report.when == "call" or report.outcome != "passed":
        for crit in criteria:
            _RESULTS[crit].append((report.nodeid, report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit in _CRITERIA:
        rows = _RESULTS.get(crit)
        if not rows:
            terminalreporter.write_line(f"criterion {crit}: NOT RUN")
            continue
        failed = [nodeid.split("::")[-1] for nodeid, outcome, _ in rows if outcome != "passed"]
        seconds = sum(d for _, _, d in rows)
        verdict = "FAIL" if failed else "PASS"
        line = f"criterion {crit}: {verdict}  ({len(rows)} checks, {seconds:.1f} s test time)"
        if failed:
            line += "  failing: " + ", ".join(failed)
        terminalreporter.write_line(line)
