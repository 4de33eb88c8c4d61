"""Shared fixtures and the one-line-per-criterion acceptance summary."""

import pytest

_ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    results = item.config.stash[_ACCEPTANCE_KEY]
    criterion = marker.args[0]
    title = marker.kwargs.get("title", item.name)
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        results[criterion] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash[_ACCEPTANCE_KEY]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(results):
        title, status = results[criterion]
        terminalreporter.write_line(f"criterion {criterion:2d}: {status}  {title}")
