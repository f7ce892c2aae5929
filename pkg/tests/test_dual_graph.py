import networkx as nx
import numpy as np
import pytest

from errors import DisconnectedRegionError, GraphValidationError
from graph.dual_graph import DualGraph
from graph.indexed_set import IndexedSet


def test_edges_are_normalized():
    graph = DualGraph(3, [(1, 0), (2, 1)], [1, 1, 1])
    assert graph.edges == ((0, 1), (1, 2))
    assert graph.edge_id(1, 0) == 0
    assert graph.has_edge(2, 1)
    assert not graph.has_edge(0, 2)
    assert graph.degree(1) == 2
    assert graph.total_population == 3


@pytest.mark.parametrize(
    "edges, population",
    [
        ([(0, 0), (0, 1)], [1, 1]),  # петля
        ([(0, 1), (1, 0)], [1, 1]),  # дубликат
        ([(0, 5)], [1, 1]),  # неизвестный узел
        ([(0, 1)], [1]),  # население не той длины
        ([(0, 1)], [1, -1]),  # отрицательное население
    ],
)
def test_invalid_graphs_are_rejected(edges, population):
    with pytest.raises(GraphValidationError):
        DualGraph(2, edges, population)


def test_disconnected_graph_is_rejected_unless_allowed():
    with pytest.raises(GraphValidationError):
        DualGraph(4, [(0, 1), (2, 3)], [1] * 4)
    graph = DualGraph(4, [(0, 1), (2, 3)], [1] * 4, require_connected=False)
    assert not graph.is_connected_subset(range(4))


def test_attribute_columns_are_read_only():
    graph = DualGraph(2, [(0, 1)], [3, 4], attributes={"votes": [1.0, 2.0]})
    column = graph.column("votes")
    np.testing.assert_array_equal(column, [1.0, 2.0])
    with pytest.raises(ValueError):
        column[0] = 5.0
    with pytest.raises(GraphValidationError):
        graph.column("missing")
    with pytest.raises(GraphValidationError):
        DualGraph(2, [(0, 1)], [3, 4], attributes={"votes": [1.0]})


def test_require_connected_subset(path_graph):
    graph = path_graph(3)
    assert graph.require_connected_subset([0, 1]) == [0, 1]
    with pytest.raises(DisconnectedRegionError):
        graph.require_connected_subset([0, 2])


def test_to_networkx_matches_structure(grid):
    graph = grid(3, 4)
    converted = graph.to_networkx()
    assert converted.number_of_nodes() == 12
    assert converted.number_of_edges() == 17
    assert nx.is_connected(converted)


def test_indexed_set_swap_remove():
    items = IndexedSet([5, 7, 9])
    items.discard(5)
    items.add(11)
    assert sorted(items) == [7, 9, 11]
    assert 5 not in items
    assert {items[i] for i in range(len(items))} == {7, 9, 11}
