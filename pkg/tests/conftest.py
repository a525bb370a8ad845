import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from umapstab.epmetric import EpMetric  # noqa: E402


@pytest.fixture
def rng():
    return random.Random(20261018)


@pytest.fixture
def line():
    """Points a, b, c at coordinates 0, 1, 3."""
    return EpMetric("abc", [[0, 1, 3], [1, 0, 2], [3, 2, 0]], exact=True)


@pytest.fixture
def line4():
    """Points a, b, d, c at coordinates 0, 1, 2, 3."""
    return EpMetric("abdc", [[0, 1, 2, 3], [1, 0, 1, 2], [2, 1, 0, 1], [3, 2, 1, 0]], exact=True)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            for name, value in getattr(rep, "user_properties", []):
                if name == "acceptance" and rep.when == "call":
                    lines.append((value, "PASS" if rep.passed else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for value, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict}  {value}")
