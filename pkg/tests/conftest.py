from __future__ import annotations

import itertools

import pytest

from corefactor.graph import MultiGraph

ACCEPTANCE_LINES: list[str] = []


def cycle(n: int) -> MultiGraph:
    return MultiGraph(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> MultiGraph:
    return MultiGraph(n, [(i, i + 1) for i in range(n - 1)])


def complete(n: int) -> MultiGraph:
    return MultiGraph(n, list(itertools.combinations(range(n), 2)))


def star(leaves: int) -> MultiGraph:
    return MultiGraph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


@pytest.fixture
def c4() -> MultiGraph:
    # a, b, c, d = 0, 1, 2, 3 in cycle order
    return cycle(4)


@pytest.fixture
def k5() -> MultiGraph:
    return complete(5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
