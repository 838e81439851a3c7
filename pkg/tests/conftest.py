import pytest

from nodedp.noise import RandomStream

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return RandomStream(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
