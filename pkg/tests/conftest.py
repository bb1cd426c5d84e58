from __future__ import annotations

import random

import pytest

from trapwalk.landscape import Landscape


def random_walled_landscape(rng: random.Random, max_span: int = 40, max_len: int = 6) -> Landscape:
    """Random interval list plus a wall, with wall <= max_span."""
    while True:
        n = rng.randint(0, 6)
        intervals = tuple(rng.randint(1, max_len) for _ in range(n))
        last = sum(intervals)
        if last + 1 <= max_span:
            return Landscape(intervals, rng.randint(last + 1, min(max_span, last + 8)))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240517)


@pytest.fixture
def random_landscapes(rng):
    return [random_walled_landscape(rng) for _ in range(60)]


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
