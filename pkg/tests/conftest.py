import pytest

from graph.dual_graph import DualGraph
from graph.grid import grid_graph
from services.rng import RandomSource


def build_path(n, population=None):
    return DualGraph(n, [(i, i + 1) for i in range(n - 1)], population or [1] * n)


def build_star(leaves):
    return DualGraph(leaves + 1, [(0, i) for i in range(1, leaves + 1)], [1] * (leaves + 1))


@pytest.fixture
def rng():
    return RandomSource(20240517)


@pytest.fixture
def path_graph():
    return build_path


@pytest.fixture
def star_graph():
    return build_star


@pytest.fixture
def grid():
    return grid_graph
