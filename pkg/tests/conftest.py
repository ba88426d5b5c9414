import random
import zlib

import pytest

from kase.scheme import keygen, setup

# (criterion, passed, detail) lines collected by the acceptance module
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng(request):
    """Per-test seeded generator, so failures replay exactly."""
    return random.Random(zlib.crc32(request.node.nodeid.encode()))


@pytest.fixture(scope="session")
def small():
    """n = 6 parameters with alpha kept for algebraic oracles."""
    r = random.Random(6)
    params = setup(6, r, keep_alpha=True)
    return params, keygen(params, r)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
