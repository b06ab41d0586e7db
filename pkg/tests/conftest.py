import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from invkit import build_closed_loop, example_system, marpi_compute  # noqa: E402

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    mark = getattr(report, "_criterion", None)
    if mark is None:
        return
    number, title = mark
    prev = _criteria.get(number, (title, True))
    _criteria[number] = (title, prev[1] and report.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep._criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture(scope="session")
def worked_system():
    return example_system()


@pytest.fixture(scope="session")
def worked_clm(worked_system):
    return build_closed_loop(worked_system)


@pytest.fixture(scope="session")
def worked_result(worked_clm):
    return marpi_compute(worked_clm)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
