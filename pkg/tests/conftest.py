import re
import sys

import pytest

from marketpower.scenario import load_scenario


@pytest.fixture(scope="session")
def desk():
    return load_scenario("desk-small")


@pytest.fixture(scope="session")
def uk_full():
    return load_scenario("uk2018-full")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    report = getattr(mod, "REPORT", None)
    if not report:
        return

    def order(key):
        num, suffix = re.match(r"(\d+)(\w*)", key).groups()
        return int(num), suffix

    terminalreporter.section("acceptance criteria")
    for key in sorted(report, key=order):
        terminalreporter.write_line(report[key])
