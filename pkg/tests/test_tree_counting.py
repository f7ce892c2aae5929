import math

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from config import Config
from errors import DisconnectedRegionError
from functions.oracle import count_spanning_trees_deletion_contraction
from functions.tree_counting import (
    log_partition_tree_score,
    log_spanning_tree_count,
    spanning_tree_count_exact,
)
from graph.dual_graph import DualGraph
from graph.grid import grid_graph
from graph.partition import Partition
from services.cache_service import CacheService


@pytest.mark.parametrize(
    "rows, cols, expected",
    [(2, 2, 4), (3, 3, 192), (1, 5, 1), (2, 3, 15)],
)
def test_grid_tree_counts(rows, cols, expected):
    graph = grid_graph(rows, cols)
    assert spanning_tree_count_exact(graph) == expected
    assert log_spanning_tree_count(graph) == pytest.approx(math.log(expected))


def test_single_node_has_one_tree(path_graph):
    assert log_spanning_tree_count(path_graph(3), [1]) == 0.0


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 8), seed=st.integers(0, 10_000))
def test_kirchhoff_matches_deletion_contraction(n, seed):
    edges = list(nx.gnp_random_graph(n, 0.6, seed=seed).edges)
    graph = DualGraph(n, edges, [1] * n, require_connected=False)
    expected = count_spanning_trees_deletion_contraction(n, edges)
    assert spanning_tree_count_exact(graph) == expected
    if expected:
        assert log_spanning_tree_count(graph) == pytest.approx(math.log(expected))
    else:
        with pytest.raises(DisconnectedRegionError):
            log_spanning_tree_count(graph)


def test_floating_point_paths_agree_with_exact(monkeypatch):
    graph = grid_graph(5, 5)
    exact = spanning_tree_count_exact(graph)
    assert exact == 557568000
    dense = log_spanning_tree_count(graph)
    monkeypatch.setattr(Config, "DENSE_LAPLACIAN_LIMIT", 0)
    sparse = log_spanning_tree_count(graph)
    assert dense == pytest.approx(math.log(exact), rel=1e-9)
    assert sparse == pytest.approx(math.log(exact), rel=1e-9)


def test_two_node_plan_scores_zero(path_graph):
    graph = path_graph(2)
    assert log_partition_tree_score(graph, Partition(graph, [1, 2])) == 0.0


def test_fifty_grid_halves():
    graph = grid_graph(50, 50)
    halves = Partition(graph, [1 if c < 25 else 2 for r in range(50) for c in range(50)])
    score = log_partition_tree_score(graph, halves) / math.log(10)
    assert score == pytest.approx(1210, rel=0.05)


def test_compact_plans_outscore_snaky_ones():
    graph = grid_graph(6, 6)
    plump = Partition(graph, [1 if r < 3 else 2 for r in range(6) for c in range(6)])
    comb = []
    for r in range(6):
        for c in range(6):
            comb.append(1 if c == 0 or (r % 2 == 0 and c < 5) else 2)
    snaky = Partition(graph, comb)
    assert snaky.size_of(1) == snaky.size_of(2) == 18
    assert log_partition_tree_score(graph, plump) > log_partition_tree_score(graph, snaky)


def test_disconnected_plans_are_rejected(path_graph):
    graph = path_graph(3)
    with pytest.raises(DisconnectedRegionError):
        log_partition_tree_score(graph, Partition(graph, [1, 2, 1]))


def test_scores_are_cached():
    graph = grid_graph(6, 6)
    plan = Partition(graph, [1 if r < 3 else 2 for r in range(6) for c in range(6)])
    cache = CacheService()
    first = log_partition_tree_score(graph, plan, cache)
    second = log_partition_tree_score(graph, plan, cache)
    assert first == second
    stats = cache.get_stats()
    assert stats["misses"] == 2
    assert stats["hits"] == 2
