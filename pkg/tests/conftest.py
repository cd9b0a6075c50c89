import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ym2 import build_loop, make_representation


@pytest.fixture(scope="session")
def su2_fund():
    return make_representation("su2", "fund")


@pytest.fixture(scope="session")
def u1_charge1():
    return make_representation("u1", "1")


@pytest.fixture()
def rectangle():
    """Unit-area rectangle: lower edge at height 1 rightward, upper at 2 leftward."""
    return build_loop([[(0.0, 1.0), (1.0, 1.0)], [(1.0, 2.0), (0.0, 2.0)]])


@pytest.fixture()
def triangle():
    """Area-1/2 wedge: flat bottom at 0.5, sloped top 0.5 + x traversed leftward."""
    return build_loop([[(0.0, 0.5), (1.0, 0.5)], [(1.0, 1.5), (0.0, 0.5)]])


@pytest.fixture()
def two_lap():
    """Winding-2 loop: the rectangle's piece pair traversed twice."""
    lower = [(0.0, 1.0), (1.0, 1.0)]
    upper = [(1.0, 2.0), (0.0, 2.0)]
    return build_loop([lower, upper, lower, upper])
