import random
from fractions import Fraction

import pytest

from mwsharp.weight import build_weight, step_weight


@pytest.fixture(scope="session")
def weights():
    cache = {}

    def get(N):
        if N not in cache:
            cache[N] = build_weight(N)
        return cache[N]

    return get


@pytest.fixture
def two_piece():
    return step_weight([0, 1, 2], [1, 2])


@pytest.fixture
def rng():
    return random.Random(20261015)


def random_dyadic(rng, lo, hi, bits=20):
    return Fraction(lo) + Fraction(rng.randrange(2**bits), 2**bits) * (hi - lo)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
