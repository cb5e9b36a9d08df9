import pytest

from helpers import EX1_X0, ex1_dom, ex1_net

_acceptance: list[tuple[str, str]] = []


@pytest.fixture
def ex1():
    return ex1_net()


@pytest.fixture
def ex1_domain():
    return ex1_dom()


@pytest.fixture
def ex1_x0():
    return EX1_X0


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        name = report.nodeid.split("::")[-1]
        _acceptance.append((name, report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{outcome:<7} {name}")
