import pytest
from hypothesis import given, settings, strategies as st

from errors import EmptyBoundaryError, EmptyDistrictError, InfeasibleMergeError
from chains.recom import (
    RecomConfig,
    RecomProposal,
    TreePartitioner,
    match_labels,
    recom_general,
    recom_step,
    select_districts,
    select_merge_pair,
)
from functions.constraints import ConstraintSet
from functions.oracle import empirical_distribution, total_variation, tree_cut_distribution
from functions.statistics import assignment_overlap
from graph.grid import grid_graph, make_grid
from graph.partition import Partition, is_contiguous, within_tolerance
from services.rng import RandomSource


def test_two_by_three_matches_tree_oracle(rng):
    graph = grid_graph(2, 3)
    exact = tree_cut_distribution(graph, 0.0)
    partition = Partition(graph, [1, 1, 2, 1, 2, 2])
    config = RecomConfig(epsilon=0.0)
    samples = []
    for _ in range(20000):
        recom_step(graph, partition, config, rng)
        samples.append(partition.assignment)
    assert total_variation(empirical_distribution(samples), exact) < 0.02


def test_general_recom_with_two_districts_matches_oracle(rng):
    graph = grid_graph(2, 3)
    exact = tree_cut_distribution(graph, 0.0)
    partition = Partition(graph, [1, 1, 2, 1, 2, 2])
    partitioner = TreePartitioner(0.0)
    samples = []
    for _ in range(20000):
        recom_general(graph, partition, 2, partitioner, rng)
        samples.append(partition.assignment)
    assert total_variation(empirical_distribution(samples), exact) < 0.02


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_step_touches_only_the_merged_pair(seed):
    graph, partition = make_grid(6, 3)
    before = partition.assignment
    recom_step(graph, partition, RecomConfig(epsilon=0.1), RandomSource(seed))
    after = partition.assignment
    touched = {label for a, b in zip(before, after) if a != b for label in (a, b)}
    assert len(touched) <= 2
    assert is_contiguous(graph, partition)
    assert partition.matches_recomputation()
    merged = sum(partition.population_of(d) for d in touched)
    for district in touched:
        assert within_tolerance(partition.population_of(district), merged / 2, 0.1)


def test_full_merge_forgets_the_start():
    graph, stripes = make_grid(4, 2)
    rows = Partition(graph, [1 if v < 8 else 2 for v in range(16)])
    partitioner = TreePartitioner(0.0)
    first = recom_general(graph, stripes, 2, partitioner, RandomSource(99))
    second = recom_general(graph, rows, 2, partitioner, RandomSource(99))
    assert first.canonical() == second.canonical()


def test_identity_partitioner_keeps_the_plan(rng):
    graph, partition = make_grid(6, 3)
    before = partition.assignment

    def keep(graph, nodes, parts, rng):
        members = set(nodes)
        return [[v for v in members if partition.label(v) == d] for d in sorted({partition.label(v) for v in members})]

    recom_general(graph, partition, 2, keep, rng)
    assert partition.assignment == before


def test_empty_group_is_rolled_back(rng):
    graph, partition = make_grid(6, 2)
    before = partition.assignment

    def collapse(graph, nodes, parts, rng):
        return [list(nodes), []]

    with pytest.raises(EmptyDistrictError):
        recom_general(graph, partition, 2, collapse, rng)
    assert partition.assignment == before
    assert partition.matches_recomputation()


def test_match_labels_keeps_largest_overlap(path_graph):
    partition = Partition(path_graph(4), [1, 1, 2, 2])
    relabel = match_labels([[2, 3], [0, 1]], [1, 2], partition)
    assert relabel == {2: 2, 3: 2, 0: 1, 1: 1}


def test_select_merge_pair_weightings(rng):
    graph, partition = make_grid(6, 3)
    for weighting in ("cut-edge", "district-pair", "boundary-length"):
        a, b = select_merge_pair(partition, weighting, rng)
        assert (a, b) in {(1, 2), (2, 3)}
    with pytest.raises(EmptyBoundaryError):
        select_merge_pair(Partition(graph, [1] * 36), "cut-edge", rng)


def test_select_districts_grows_adjacent_set(rng):
    graph, partition = make_grid(8, 4)
    chosen = select_districts(partition, 3, rng)
    assert chosen in ([1, 2, 3], [2, 3, 4])
    assert select_districts(partition, 4, rng) == [1, 2, 3, 4]
    with pytest.raises(ValueError):
        select_districts(partition, 5, rng)


def test_infeasible_merge_reports_districts(path_graph, rng):
    graph = path_graph(3)
    partition = Partition(graph, [1, 1, 2])
    with pytest.raises(InfeasibleMergeError) as info:
        recom_step(graph, partition, RecomConfig(epsilon=0.0, max_tree_redraws=5), rng)
    assert info.value.districts == (1, 2)
    assert partition.assignment == (1, 1, 2)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"epsilon": -0.1},
        {"epsilon": 1.0},
        {"epsilon": 0.1, "pair_weighting": "random"},
        {"epsilon": 0.1, "max_tree_redraws": 0},
        {"epsilon": 0.1, "merge_count": 1},
    ],
)
def test_invalid_recom_config(kwargs):
    with pytest.raises(ValueError):
        RecomConfig(**kwargs)


def test_rejected_proposal_is_rolled_back(rng):
    graph, partition = make_grid(6, 3)
    before = partition.assignment
    constraint = ConstraintSet(pop_tolerance=0.1).with_predicate("never", lambda p: False)
    proposal = RecomProposal(graph, RecomConfig(epsilon=0.1), constraint=constraint)
    outcome = proposal.propose(partition, rng)
    assert not outcome.accepted
    assert partition.assignment == before
    assert partition.matches_recomputation()


def test_general_proposal_merges_three(rng):
    graph, partition = make_grid(6, 3)
    proposal = RecomProposal(graph, RecomConfig(epsilon=0.1, merge_count=3), general=True)
    for _ in range(20):
        assert proposal.propose(partition, rng).accepted
        assert is_contiguous(graph, partition)
        for district in range(1, 4):
            assert within_tolerance(partition.population_of(district), 12, 0.1)


@pytest.mark.slow
def test_hundred_grid_recom_mixes_quickly():
    graph, partition = make_grid(100, 10)
    seed = partition.assignment
    rng = RandomSource(2024)
    config = RecomConfig(epsilon=0.02)
    for _ in range(100):
        recom_step(graph, partition, config, rng)
    assert 600 <= partition.cut_edge_count <= 1400
    assert is_contiguous(graph, partition)
    assert assignment_overlap(partition, seed) < 0.95
