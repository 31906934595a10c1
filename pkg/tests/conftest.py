"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from collections import defaultdict

_criteria: dict[int, str] = {}
_node_criterion: dict[str, int] = {}
_outcomes: dict[int, list[bool]] = defaultdict(list)
_skipped: dict[int, int] = defaultdict(int)


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is None:
            continue
        number, title = marker.args
        _criteria[number] = title
        _node_criterion[item.nodeid] = number


def pytest_runtest_logreport(report):
    number = _node_criterion.get(report.nodeid)
    if number is None:
        return
    if report.skipped:
        # data-gated checks are optional and do not count either way
        _skipped[number] += 1
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes[number].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        results = _outcomes.get(number, [])
        if not results:
            status = "NOT RUN"
        elif all(results):
            status = "PASS"
        else:
            status = "FAIL"
        passed = sum(results)
        extra = f", {_skipped[number]} skipped" if _skipped[number] else ""
        terminalreporter.write_line(
            f"criterion {number:2d} {status:7s} {_criteria[number]} "
            f"({passed}/{len(results)} checks{extra})"
        )
