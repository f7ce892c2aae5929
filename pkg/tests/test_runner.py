import io
import json

import pandas as pd
import pytest
from pydantic import ValidationError

from config import RunConfig, load_run_config
from errors import ChainRunError, ChainStuckError, GraphValidationError, SeedingError
from graph.dual_graph import DualGraph
from graph.partition import Partition, is_contiguous
from graph.io import dump_graph_json, write_assignment_csv
from graph.grid import make_grid
from services.monitoring import MonitoringService
from services.runner import ChainRunner, prepare_run, run_chain, run_to_file


def _config(**overrides):
    values = {"grid": 6, "districts": 2, "chain": "recom", "steps": 40, "pop_tolerance": 0.1}
    values.update(overrides)
    return RunConfig(**values)


@pytest.mark.parametrize(
    "steps, burn_in, interval",
    [(40, 0, 1), (50, 10, 4), (41, 0, 7), (30, 29, 1)],
)
def test_record_count_and_steps(steps, burn_in, interval):
    records = list(run_chain(_config(steps=steps, burn_in=burn_in, interval=interval)))
    assert len(records) == (steps - burn_in) // interval
    assert [r["step"] for r in records] == [burn_in + interval * (j + 1) for j in range(len(records))]


def test_runs_are_reproducible():
    config = _config(chain="flip", pattern="rows:2", stats=["cut_edges", "seats", "max_share"])
    first, second = io.StringIO(), io.StringIO()
    ChainRunner(config).run(first)
    ChainRunner(config).run(second)
    assert first.getvalue() == second.getvalue()
    different = io.StringIO()
    ChainRunner(config.model_copy(update={"rng_seed": 99})).run(different)
    assert different.getvalue() != first.getvalue()


def test_header_describes_the_run():
    handle = io.StringIO()
    count = ChainRunner(_config(steps=5)).run(handle)
    lines = handle.getvalue().splitlines()
    header = json.loads(lines[0])["header"]
    assert count == 5 and len(lines) == 6
    assert header["config"]["chain"] == "recom"
    assert header["graph"] == {"nodes": 36, "edges": 60}
    assert header["seed_cut_edges"] == 6
    assert header["statistics"] == ["cut_edges", "population_deviation"]
    assert "PCG64" in header["rng"]["generator"]


def test_recom_run_stays_valid():
    config = _config(steps=30, validate_steps=True, stats=["cut_edges", "population_deviation"])
    for record in run_chain(config):
        assert record["stats"]["population_deviation"] <= 0.1 + 1e-9


def test_assignments_are_attached_periodically():
    records = list(run_chain(_config(steps=10, assignment_every=3)))
    assert [r["step"] for r in records if "assignment" in r] == [3, 6, 9]
    graph, _ = make_grid(6, 2)
    assert is_contiguous(graph, Partition(graph, records[2]["assignment"]))


def test_fast_uniform_flip_counts_waits():
    config = _config(chain="uniform-flip-fast", steps=300, pop_tolerance=0.2,
                     stats=["cut_edges"], assignment_every=1)
    monitor = MonitoringService()
    records = list(run_chain(config, monitor))
    assert [r["step"] for r in records] == list(range(1, 301))
    # Каждый шаг ожидания повторяет состояние, поэтому переходов меньше записей
    assert monitor.counters["runner.proposals"] < 300
    changes = sum(1 for a, b in zip(records, records[1:]) if a["assignment"] != b["assignment"])
    assert changes < monitor.counters["runner.proposals"] + 1


def test_tempering_run():
    config = _config(chain="flip", pop_tolerance=0.2, replicas=3, swap_interval=5,
                     beta_schedule="const:2", steps=60)
    monitor = MonitoringService()
    records = list(run_chain(config, monitor))
    assert len(records) == 60
    assert "tempering.swaps_accepted" in monitor.counters


def test_annealed_flip_run():
    config = _config(chain="uniform-flip", pop_tolerance=0.2, beta_schedule="lin:10,40,0,3",
                     flip_m=2.0, steps=60)
    assert len(list(run_chain(config))) == 60


def test_stuck_chain_reports_the_step():
    config = _config(grid=2, districts=2, chain="flip", pop_tolerance=0.0, steps=5)
    monitor = MonitoringService()
    with pytest.raises(ChainRunError) as info:
        list(run_chain(config, monitor))
    assert info.value.step == 1
    assert isinstance(info.value.cause, ChainStuckError)
    assert "runner.ChainStuckError" in monitor.errors


def test_seed_must_satisfy_constraints():
    config = _config(grid=4, pattern="cols:2", max_share=0.1, chain="flip")
    with pytest.raises(SeedingError):
        prepare_run(config)


def test_non_stripe_seed_on_indivisible_grid():
    setup = prepare_run(_config(grid=10, districts=4, seed_method="recursive-tree", chain="flip"))
    assert setup.graph.node_count == 100
    assert setup.seed.k == 4
    with pytest.raises(GraphValidationError):
        prepare_run(_config(grid=10, districts=4))


def test_runner_traces_durations():
    monitor = MonitoringService()
    list(run_chain(_config(steps=5), monitor))
    assert len(monitor.get_metrics("runner", "step_seconds")["values"]) == 5
    assert len(monitor.get_metrics("runner", "prepare_seconds")["values"]) == 1


def test_generated_seeds():
    setup = prepare_run(_config(grid=8, districts=4, seed_method="recursive-tree", pop_tolerance=0.1))
    assert setup.seed.k == 4
    setup = prepare_run(_config(grid=8, districts=2, seed_method="flood-fill", pop_tolerance=0.1))
    assert is_contiguous(setup.graph, setup.seed)


def test_graph_and_assignment_files(tmp_path):
    graph, stripes = make_grid(6, 3, "rows:2")
    graph_path, plan_path, out_path = tmp_path / "g.json", tmp_path / "plan.csv", tmp_path / "out.jsonl"
    dump_graph_json(graph, str(graph_path))
    write_assignment_csv(stripes, str(plan_path))
    config = RunConfig(graph=str(graph_path), seed_method="file", assignment=str(plan_path), districts=3,
                       chain="recom", steps=12, pop_tolerance=0.1, stats=["cut_edges", "seats", "shares"])
    assert run_to_file(config, str(out_path)) == 12
    first = json.loads(out_path.read_text().splitlines()[1])
    assert len(first["stats"]["shares"]) == 3


def test_unit_column_statistic(tmp_path):
    graph = DualGraph(4, [(0, 1), (1, 2), (2, 3)], [1] * 4, attributes={"county": [0, 0, 1, 1]})
    path = tmp_path / "path.json"
    dump_graph_json(graph, str(path))
    config = RunConfig(graph=str(path), seed_method="recursive-tree", districts=2, chain="flip",
                       pop_tolerance=0.5, steps=5, stats=["units_split"], unit_column="county")
    assert all(r["stats"]["units_split"] in (0, 1, 2) for r in run_chain(config))


@pytest.mark.parametrize(
    "overrides",
    [
        {"steps": 10, "burn_in": 10},
        {"grid": None, "graph": None},
        {"grid": None, "graph": "g.json"},  # полосы доступны только для решетки
        {"seed_method": "file"},
        {"chain": "recom", "pop_tolerance": None},
        {"replicas": 2, "replica_betas": [1.0]},
        {"replicas": 2, "chain": "uniform-flip-fast"},
        {"pop_tolerance": 1.5},
        {"chain": "zigzag"},
    ],
)
def test_invalid_run_configs(overrides):
    with pytest.raises(ValidationError):
        _config(**overrides)


def test_load_run_config_merges_overrides(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"grid": 6, "districts": 2, "steps": 100, "stats": "cut_edges,seats"}))
    config = load_run_config(str(path), {"steps": 20, "chain": None})
    assert config.steps == 20
    assert config.chain == "recom"
    assert config.stats == ["cut_edges", "seats"]


@pytest.mark.slow
def test_hundred_grid_recom_ensemble():
    config = RunConfig(grid=100, districts=10, pattern="rows:40", chain="recom", steps=1000,
                       pop_tolerance=0.02, interval=10, stats=["cut_edges", "seats", "seed_overlap"])
    records = list(run_chain(config))
    assert len(records) == 100
    assert all(600 <= r["stats"]["cut_edges"] <= 1400 for r in records[10:])
    assert records[-1]["stats"]["seed_overlap"] < 0.95
    assert any(r["stats"]["seats"] > 0 for r in records)


def _seat_shares(config):
    seats = pd.Series([r["stats"]["seats"] for r in run_chain(config)])
    return seats.value_counts(normalize=True)


@pytest.mark.slow
def test_recom_seat_histograms_agree_across_vote_layouts():
    shares = {}
    for pattern in ("rows:40", "cols:40"):
        config = RunConfig(grid=100, districts=10, pattern=pattern, chain="recom", steps=10_000,
                           burn_in=1_000, interval=10, pop_tolerance=0.02, stats=["seats"])
        shares[pattern] = _seat_shares(config)
        assert set(shares[pattern].index) <= {3, 4, 5}
        assert shares[pattern].idxmax() == 4
    for seats in (3, 4, 5):
        assert abs(shares["rows:40"].get(seats, 0.0) - shares["cols:40"].get(seats, 0.0)) <= 0.1


@pytest.mark.slow
@pytest.mark.parametrize("pattern, seed_seats", [("rows:40", 0), ("cols:40", 4)])
def test_flip_stays_at_the_seed_seat_count(pattern, seed_seats):
    config = RunConfig(grid=100, districts=10, pattern=pattern, chain="flip", steps=1_000_000,
                       interval=100, pop_tolerance=0.02, stats=["seats"])
    assert _seat_shares(config).get(seed_seats, 0.0) >= 0.95


@pytest.mark.slow
def test_unconstrained_flip_grows_fractal_boundaries():
    config = RunConfig(grid=50, districts=2, chain="flip", pop_tolerance=None, steps=500_000,
                       interval=50_000, stats=["boundary_fraction", "cut_edge_fraction"])
    final = list(run_chain(config))[-1]["stats"]
    assert final["boundary_fraction"] > 0.5
    assert final["cut_edge_fraction"] > 0.25


@pytest.mark.slow
def test_recom_keeps_boundaries_short():
    config = RunConfig(grid=50, districts=2, chain="recom", pop_tolerance=0.02, steps=1_000,
                       stats=["cut_edges"])
    cut_edges = [r["stats"]["cut_edges"] for r in run_chain(config)]
    # Полосы 25 + 25: у начального плана 50 разрезанных ребер
    assert sum(c < 3 * 50 for c in cut_edges) >= 0.99 * len(cut_edges)


@pytest.mark.slow
def test_annealed_flip_collapses_near_its_seed():
    config = RunConfig(grid=50, districts=4, seed_method="recursive-tree", chain="flip", pop_tolerance=0.1,
                       beta_schedule="lin:100000,500000,0,3", steps=500_000, interval=100_000,
                       stats=["seed_overlap", "cut_edges"])
    records = list(run_chain(config))
    assert len(records) == 5
    assert records[-1]["stats"]["seed_overlap"] >= 0.7
