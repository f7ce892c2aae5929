import pytest

from chains.flip import FlipProposal
from chains.recom import RecomConfig, RecomProposal
from chains.tempering import ParallelTempering, advance, default_ladder
from functions.constraints import ConstraintSet
from graph.grid import make_grid
from graph.state import new_chain_state
from services.monitoring import MonitoringService
from services.rng import RandomSource


def test_default_ladder():
    assert default_ladder(4, 3.0) == pytest.approx([0.0, 1.0, 2.0, 3.0])
    assert default_ladder(1, 2.0) == [2.0]
    with pytest.raises(ValueError):
        default_ladder(0)


def test_advance_without_weights_accepts_every_move(rng):
    graph, partition = make_grid(6, 2)
    proposal = FlipProposal(graph, ConstraintSet(pop_tolerance=0.2))
    state = new_chain_state(partition)
    for _ in range(50):
        advance(state, proposal, rng)
        assert state["accepted"]
    assert state["step"] == 50
    assert state["rejections"] == 0


def test_cold_chain_rejects_growing_boundaries():
    graph, partition = make_grid(6, 2)
    proposal = FlipProposal(graph, ConstraintSet(pop_tolerance=0.2))
    state = new_chain_state(partition)
    monitor = MonitoringService()
    rng = RandomSource(8)
    for _ in range(300):
        advance(state, proposal, rng, beta=5.0, monitor=monitor)
        assert state["partition"].matches_recomputation()
    assert state["rejections"] > 0
    assert monitor.counters["metropolis.rejections"] == state["rejections"]
    # Холодная цепь держит разрез около минимального
    assert state["partition"].cut_edge_count <= 12


def test_parallel_tempering_keeps_ladder(rng):
    graph, partition = make_grid(6, 2)
    proposal = RecomProposal(graph, RecomConfig(epsilon=0.1))
    ladder = default_ladder(3, 2.0)
    tempering = ParallelTempering(proposal, [partition.copy() for _ in ladder], ladder, 5, rng)
    for _ in range(40):
        coldest = tempering.step()
        assert coldest["beta"] == max(tempering.betas)
    assert sorted(tempering.betas) == pytest.approx(sorted(ladder))
    assert tempering.steps == 40
    assert all(state["step"] == 40 for state in tempering.states)


def test_parallel_tempering_validation(rng):
    graph, partition = make_grid(6, 2)
    proposal = FlipProposal(graph, ConstraintSet())
    with pytest.raises(ValueError):
        ParallelTempering(proposal, [partition], [1.0], 5, rng)
    with pytest.raises(ValueError):
        ParallelTempering(proposal, [partition, partition.copy()], [0.0, 1.0], 0, rng)
