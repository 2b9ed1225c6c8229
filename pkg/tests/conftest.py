import pytest

from inductive_link.presets import table1_design

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def sp_design():
    return table1_design("sp")


@pytest.fixture
def series_design():
    return table1_design("series")
