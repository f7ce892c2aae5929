import pytest
from hypothesis import given, settings, strategies as st

from functions.constraints import (
    ConstraintSet,
    WeightSchedule,
    acceptance_probability,
    anneal_beta,
    check,
    max_share_predicate,
    metropolis_accept,
    min_share_predicate,
    parse_cut_cap,
    parse_schedule,
    swap_probability,
    tempering_swap,
)
from graph.grid import PARTY_A, grid_graph, make_grid
from graph.partition import Partition
from services.rng import RandomSource


def test_population_tolerance(path_graph):
    graph = path_graph(4)
    assert check(ConstraintSet(pop_tolerance=0.0), graph, Partition(graph, [1, 1, 2, 2]))
    assert not check(ConstraintSet(pop_tolerance=0.0), graph, Partition(graph, [1, 2, 2, 2]))
    assert check(ConstraintSet(pop_tolerance=0.5), graph, Partition(graph, [1, 2, 2, 2]))


def test_contiguity_can_be_switched_off(path_graph):
    graph = path_graph(3)
    split = Partition(graph, [1, 2, 1])
    assert not check(ConstraintSet(), graph, split)
    assert check(ConstraintSet(require_contiguity=False), graph, split)


def test_cut_edge_caps():
    graph, stripes = make_grid(4, 2)
    assert check(ConstraintSet(cut_edge_cap=4), graph, stripes)
    assert not check(ConstraintSet(cut_edge_cap=3), graph, stripes)
    # 20% от 24 ребер - 4
    assert ConstraintSet(cut_edge_cap=0.2).cut_cap_for(graph) == 4
    assert check(ConstraintSet(cut_edge_cap=0.2), graph, stripes)


@pytest.mark.parametrize(
    "value, expected",
    [(None, None), ("5%", 0.05), ("120", 120), (120, 120), (0.05, 0.05), (120.0, 120)],
)
def test_parse_cut_cap(value, expected):
    assert parse_cut_cap(value) == expected


def test_share_predicates():
    graph, stripes = make_grid(10, 2, "cols:4")
    # Левая полоса: 4 из 5 столбцов за партию A
    assert not check(ConstraintSet().with_predicate("cap", max_share_predicate(graph, PARTY_A, "population", 0.6)),
                     graph, stripes)
    assert check(ConstraintSet().with_predicate("cap", max_share_predicate(graph, PARTY_A, "population", 0.8)),
                 graph, stripes)
    assert min_share_predicate(graph, PARTY_A, "population", 0.8)(stripes)
    assert not min_share_predicate(graph, PARTY_A, "population", 0.8, districts=2)(stripes)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=9, max_size=9))
def test_adding_checks_never_admits_more(labels):
    graph = grid_graph(3, 3)
    assignment = [1, 2, 3] + labels[3:]
    partition = Partition(graph, assignment, 3)
    loose = ConstraintSet()
    strict = ConstraintSet(pop_tolerance=0.5, cut_edge_cap=8).with_predicate("odd", lambda p: p.cut_edge_count % 2 == 1)
    if check(strict, graph, partition):
        assert check(loose, graph, partition)


def test_anneal_beta_linear_schedule():
    schedule = WeightSchedule.linear(100_000, 500_000, 0.0, 3.0)
    assert anneal_beta(schedule, 0) == 0.0
    assert anneal_beta(schedule, 100_000) == 0.0
    assert anneal_beta(schedule, 300_000) == pytest.approx(1.5)
    assert anneal_beta(schedule, 500_000) == 3.0
    assert anneal_beta(schedule, 900_000) == 3.0
    with pytest.raises(ValueError):
        anneal_beta(schedule, -1)


def test_parse_schedule():
    assert parse_schedule(None) is None
    assert parse_schedule("lin:100000,500000,0,3") == WeightSchedule.linear(100_000, 500_000, 0.0, 3.0)
    assert parse_schedule("const:1.5") == WeightSchedule.constant(1.5)
    assert parse_schedule("const:1.5").max_beta == 1.5
    with pytest.raises(ValueError):
        parse_schedule("cosine:1,2")
    with pytest.raises(ValueError):
        WeightSchedule.linear(10, 5, 0.0, 1.0)


@pytest.mark.parametrize(
    "current, proposed, beta, expected",
    [(10, 13, 1.0, 0.125), (10, 9, 1.0, 1.0), (10, 13, 0.0, 1.0), (10, 11, 2.0, 0.25)],
)
def test_acceptance_probability(current, proposed, beta, expected):
    assert acceptance_probability(current, proposed, beta) == pytest.approx(expected)


def test_metropolis_acceptance_rate():
    rng = RandomSource(17)
    accepted = sum(metropolis_accept(10, 13, 1.0, rng) for _ in range(20000))
    assert accepted / 20000 == pytest.approx(0.125, abs=0.01)


@pytest.mark.parametrize(
    "beta_i, beta_j, cut_i, cut_j, expected",
    [(1.0, 2.0, 100, 100, 1.0), (1.0, 2.0, 100, 104, 1.0), (1.0, 2.0, 104, 100, 2.0 ** -4)],
)
def test_swap_probability(beta_i, beta_j, cut_i, cut_j, expected):
    assert swap_probability(beta_i, beta_j, cut_i, cut_j) == pytest.approx(expected)


def test_tempering_swap_barrier():
    rng = RandomSource(1)
    # Горячая реплика с меньшим разрезом всегда уступает место холодной
    assert tempering_swap([100, 104], [1.0, 2.0], 10, rng) == [2.0, 1.0]
    assert tempering_swap([100, 104], [1.0, 2.0], 10, rng, step=15) == [1.0, 2.0]
    assert tempering_swap([100, 104], [1.0, 2.0], 10, rng, step=20) == [2.0, 1.0]
    with pytest.raises(ValueError):
        tempering_swap([100], [1.0], 10, rng)


def test_tempering_swap_keeps_the_ladder():
    rng = RandomSource(3)
    betas = [0.0, 1.0, 2.0, 3.0]
    for _ in range(200):
        cuts = [rng.randbelow(50) for _ in betas]
        betas = tempering_swap(cuts, betas, 1, rng)
        assert sorted(betas) == [0.0, 1.0, 2.0, 3.0]
