import numpy as np
import pytest

from errors import GraphValidationError
from graph.grid import PARTY_A, PARTY_B, make_grid, parse_vote_pattern, stripe_plan, voting_grid
from graph.io import (
    dump_graph_json,
    graph_from_document,
    load_graph_json,
    read_assignment_csv,
    write_assignment_csv,
)


def test_hundred_grid_with_row_votes():
    graph, stripes = make_grid(100, 10, "rows:40")
    assert graph.node_count == 10000
    assert graph.edge_count == 19800
    assert stripes.cut_edge_count == 900
    assert graph.column(PARTY_A).sum() == 4000
    np.testing.assert_array_equal(graph.column(PARTY_A) + graph.column(PARTY_B), np.ones(10000))


def test_small_grid_stripes():
    graph, stripes = make_grid(4, 2)
    assert graph.node_count == 16
    assert graph.edge_count == 24
    assert stripes.size_of(1) == stripes.size_of(2) == 8
    assert stripes.cut_edge_count == 4


def test_stripes_must_divide_the_side():
    with pytest.raises(GraphValidationError):
        make_grid(5, 2)


def test_voting_grid_needs_no_stripes():
    graph = voting_grid(50, "cols:10")
    assert graph.node_count == 2500
    assert graph.column(PARTY_A).sum() == 500
    with pytest.raises(GraphValidationError):
        stripe_plan(graph, 50, 4)
    assert stripe_plan(graph, 50, 5).cut_edge_count == 4 * 50
    with pytest.raises(GraphValidationError):
        voting_grid(0)


@pytest.mark.parametrize(
    "pattern, expected",
    [("none", ("none", 0)), ("rows:40", ("rows", 40)), ("cols:3", ("cols", 3))],
)
def test_vote_patterns(pattern, expected):
    assert parse_vote_pattern(pattern) == expected


@pytest.mark.parametrize("pattern", ["diag:4", "rows:x", "rows"])
def test_bad_vote_patterns(pattern):
    with pytest.raises(ValueError):
        parse_vote_pattern(pattern)


def test_graph_json_round_trip(tmp_path):
    graph, stripes = make_grid(4, 2, "cols:1")
    path = tmp_path / "grid.json"
    dump_graph_json(graph, str(path))
    loaded = load_graph_json(str(path))
    assert loaded.edges == graph.edges
    assert loaded.population == graph.population
    assert loaded.node_ids == graph.node_ids
    np.testing.assert_array_equal(loaded.column(PARTY_A), graph.column(PARTY_A))

    csv_path = tmp_path / "plan.csv"
    write_assignment_csv(stripes, str(csv_path))
    assert read_assignment_csv(str(csv_path), loaded).assignment == stripes.assignment


def test_graph_document_errors():
    with pytest.raises(GraphValidationError):
        graph_from_document({"nodes": []})
    with pytest.raises(GraphValidationError):
        graph_from_document({"nodes": [{"id": "a", "pop": 1}], "edges": [{"a": "a", "b": "z"}]})
    with pytest.raises(GraphValidationError):
        graph_from_document({
            "nodes": [{"id": "a", "pop": 1, "attrs": {"x": 1}}, {"id": "b", "pop": 1}],
            "edges": [{"a": "a", "b": "b"}],
        })


def test_document_edge_weights():
    graph = graph_from_document({
        "nodes": [{"id": "a", "pop": 2}, {"id": "b", "pop": 3}],
        "edges": [{"a": "a", "b": "b", "w": 2.5}],
    })
    assert graph.edge_weights == (2.5,)
    assert graph.total_population == 5


def test_assignment_csv_validation(tmp_path):
    graph, _ = make_grid(2, 1)
    bad_header = tmp_path / "bad.csv"
    bad_header.write_text("id,label\n0-0,1\n0-1,1\n1-0,1\n1-1,1\n")
    with pytest.raises(GraphValidationError):
        read_assignment_csv(str(bad_header), graph)

    missing = tmp_path / "missing.csv"
    missing.write_text("node_id,district\n0-0,1\n0-1,1\n")
    with pytest.raises(GraphValidationError):
        read_assignment_csv(str(missing), graph)

    duplicated = tmp_path / "dup.csv"
    duplicated.write_text("node_id,district\n0-0,1\n0-0,1\n1-0,1\n1-1,1\n")
    with pytest.raises(GraphValidationError):
        read_assignment_csv(str(duplicated), graph)


def test_assignment_csv_unknown_node(tmp_path):
    graph, _ = make_grid(2, 1)
    path = tmp_path / "plan.csv"
    path.write_text("node_id,district\n0-0,1\n0-1,2\n1-0,1\n9-9,2\n")
    with pytest.raises(GraphValidationError):
        read_assignment_csv(str(path), graph)
