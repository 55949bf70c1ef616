import random

import pytest

from statesum.corpus import Document
from statesum.fixture import load_fixture
from statesum.oracle import OracleLabels


@pytest.fixture(scope="session")
def fixture_docs():
    return load_fixture()


@pytest.fixture
def toy_doc():
    return Document("toy", [["The", "cat", "sat"], ["a", "dog", "ran", "far", "away"],
                            ["cat", "naps"]], [["the", "cat", "naps"]])


@pytest.fixture
def toy_gold():
    return OracleLabels([1, 0, 1], [[1, 0, 1], [0] * 5, [1, 1]], 0.0, "avg-r1r2")


@pytest.fixture
def rng():
    return random.Random(1234)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
