import logging
import time
from dataclasses import dataclass
from typing import Any, Dict, Iterator, Optional, TextIO, Tuple

from config import Config, RunConfig
from errors import ChainRunError, GraphValidationError, SamplerError, SeedingError
from chains.flip import FlipProposal
from chains.recom import RecomConfig, RecomProposal
from chains.seeding import flood_fill_seed, recursive_tree_seed
from chains.tempering import DEFAULT_LADDER_TOP, ParallelTempering, Proposal, advance, default_ladder
from functions.constraints import (
    ConstraintSet,
    WeightSchedule,
    anneal_beta,
    check,
    max_share_predicate,
    parse_cut_cap,
    parse_schedule,
)
from functions.statistics import ElectionSpec, Statistic, StatisticContext, build_statistics, evaluate
from graph.dual_graph import POPULATION, DualGraph
from graph.grid import PARTY_A, PARTY_B, make_grid, voting_grid
from graph.io import load_graph_json, read_assignment_csv
from graph.partition import Partition, is_contiguous
from graph.state import ChainState, new_chain_state
from services.cache_service import CacheService
from services.ensemble_store import EnsembleRecord, EnsembleWriter
from services.monitoring import MonitoringService
from services.rng import RandomSource

# Настройка логгера
logger = logging.getLogger(__name__)


@dataclass
class RunSetup:
    """Все, что нужно циклу цепи: граф, начальный план, ограничения, предложение"""

    graph: DualGraph
    seed: Partition
    constraint: ConstraintSet
    proposal: Proposal
    schedule: Optional[WeightSchedule]
    statistics: Dict[str, Statistic]
    rng: RandomSource
    chain_rng: RandomSource


# ------------------------------
# Сборка компонентов прогона
# ------------------------------

def build_graph(config: RunConfig) -> Tuple[DualGraph, Optional[Partition]]:
    """
    Граф из файла или синтетическая решетка.
    План из полос строится только для seed_method=stripes: делимость стороны на k нужна лишь ему.
    """
    if config.grid is not None:
        if config.seed_method != "stripes":
            return voting_grid(config.grid, config.pattern), None
        stripes = config.grid_districts or config.districts
        if stripes is None:
            raise GraphValidationError("grid runs need grid_districts or districts")
        return make_grid(config.grid, stripes, config.pattern)
    return load_graph_json(config.graph), None


def build_election(config: RunConfig, graph: DualGraph) -> Optional[ElectionSpec]:
    if config.election is not None:
        e = config.election
        return ElectionSpec(party_a=e.party_a, party_b=None if e.total else e.party_b, total=e.total, name=e.name)
    if PARTY_A in graph.attribute_names and PARTY_B in graph.attribute_names:
        return ElectionSpec(party_a=PARTY_A, party_b=PARTY_B)
    return None


def share_columns(config: RunConfig, graph: DualGraph,
                  election: Optional[ElectionSpec]) -> Tuple[Optional[str], Optional[str]]:
    """Явные столбцы долей; для синтетической решетки - голоса A к населению"""
    if config.share_numerator and config.share_denominator:
        return config.share_numerator, config.share_denominator
    if election is not None and election.total is not None:
        return election.party_a, election.total
    if config.grid is not None and PARTY_A in graph.attribute_names:
        return PARTY_A, POPULATION
    return None, None


def build_seed(config: RunConfig, graph: DualGraph, stripes: Optional[Partition], rng: RandomSource) -> Partition:
    epsilon = config.pop_tolerance or 0.0
    method = config.seed_method
    if method == "stripes":
        if stripes is None:
            raise SeedingError("stripes seed needs a synthetic grid")
        return stripes
    if method == "file":
        return read_assignment_csv(config.assignment, graph, k=config.districts)
    k = config.district_count
    if method == "recursive-tree":
        return recursive_tree_seed(graph, k, epsilon, rng, max_tree_redraws=config.max_tree_redraws)
    return flood_fill_seed(graph, k, epsilon, rng)


def build_constraint(config: RunConfig, graph: DualGraph, columns: Tuple[Optional[str], Optional[str]]) -> ConstraintSet:
    constraint = ConstraintSet(
        pop_tolerance=config.pop_tolerance,
        cut_edge_cap=parse_cut_cap(config.cut_edge_cap),
        require_contiguity=config.require_contiguity,
    )
    if config.max_share is not None:
        numerator, denominator = columns
        if numerator is None:
            raise GraphValidationError("max_share needs share_numerator and share_denominator columns")
        constraint = constraint.with_predicate(
            f"max_share<={config.max_share}",
            max_share_predicate(graph, numerator, denominator, config.max_share),
        )
    return constraint


def build_proposal(config: RunConfig, graph: DualGraph, constraint: ConstraintSet,
                   monitor: Optional[MonitoringService] = None) -> Proposal:
    if config.chain in ("recom", "recom-general"):
        recom_config = RecomConfig(
            epsilon=config.pop_tolerance,
            pair_weighting=config.pair_weighting,
            max_tree_redraws=config.max_tree_redraws,
            merge_count=config.merge_count,
        )
        return RecomProposal(graph, recom_config, general=config.chain == "recom-general",
                             constraint=constraint, monitor=monitor)
    return FlipProposal(graph, constraint, variant=config.chain, m=config.flip_m, monitor=monitor)


def prepare_run(config: RunConfig, monitor: Optional[MonitoringService] = None) -> RunSetup:
    rng = RandomSource(config.rng_seed)
    seed_rng, chain_rng = rng.spawn(2)

    graph, stripes = build_graph(config)
    seed = build_seed(config, graph, stripes, seed_rng)
    election = build_election(config, graph)
    columns = share_columns(config, graph, election)
    constraint = build_constraint(config, graph, columns)
    if not check(constraint, graph, seed):
        raise SeedingError("seed plan does not satisfy the run constraints")

    context = StatisticContext(
        graph=graph,
        election=election,
        share_numerator=columns[0],
        share_denominator=columns[1],
        unit_column=config.unit_column,
        seed_assignment=seed.assignment,
        cache=CacheService(),
    )
    return RunSetup(
        graph=graph,
        seed=seed,
        constraint=constraint,
        proposal=build_proposal(config, graph, constraint, monitor),
        schedule=parse_schedule(config.beta_schedule),
        statistics=build_statistics(config.stats, context),
        rng=rng,
        chain_rng=chain_rng,
    )


# ------------------------------
# Цикл цепи
# ------------------------------

class ChainRunner:
    """
    Выполняет цепь: отбрасывает первые burn_in шагов и выдает запись
    каждые interval шагов. Шаг - одно возвращенное состояние; ожидания
    быстрого Uniform Flip засчитываются как повторы состояния.
    """

    def __init__(self, config: RunConfig, monitor: Optional[MonitoringService] = None):
        self.config = config
        self.monitor = monitor or MonitoringService()
        self.logger = logging.getLogger("chain_runner")
        self.setup: Optional[RunSetup] = None

    def header(self) -> Dict[str, Any]:
        setup = self.setup
        return {
            "config": self.config.model_dump(mode="json"),
            "rng": setup.rng.describe(),
            "graph": {"nodes": setup.graph.node_count, "edges": setup.graph.edge_count},
            "seed_cut_edges": setup.seed.cut_edge_count,
            "statistics": list(setup.statistics),
        }

    def _record(self, step: int, partition: Partition, index: int,
                stats: Optional[Dict[str, Any]] = None, assignment: Optional[Tuple[int, ...]] = None) -> EnsembleRecord:
        record = EnsembleRecord(step=step, stats=stats if stats is not None else evaluate(self.setup.statistics, partition))
        if index % self.config.assignment_every == 0:
            record["assignment"] = list(assignment if assignment is not None else partition.assignment)
        return record

    def _validate(self, partition: Partition) -> None:
        if not partition.matches_recomputation():
            raise GraphValidationError("incremental partition state diverged from recomputation")
        if self.config.chain in ("recom", "recom-general") and not is_contiguous(self.setup.graph, partition):
            raise GraphValidationError("ReCom produced a non-contiguous plan")

    def records(self) -> Iterator[EnsembleRecord]:
        """Поток записей ансамбля; ошибки цепи оборачиваются в ChainRunError с номером шага"""
        config = self.config
        if self.setup is None:
            with self.monitor.trace("runner.prepare"):
                self.setup = prepare_run(config, self.monitor)
        setup = self.setup
        fast = config.chain == "uniform-flip-fast"

        tempering: Optional[ParallelTempering] = None
        if config.replicas > 1:
            top = setup.schedule.max_beta if setup.schedule else DEFAULT_LADDER_TOP
            betas = config.replica_betas or default_ladder(config.replicas, top)
            tempering = ParallelTempering(
                setup.proposal, [setup.seed.copy() for _ in range(config.replicas)], betas,
                config.swap_interval, setup.chain_rng, self.monitor,
            )
            state: ChainState = tempering.coldest()
        else:
            state = new_chain_state(setup.seed.copy())

        step = 0
        emitted = 0
        next_emit = config.burn_in + config.interval
        next_progress = Config.PROGRESS_EVERY
        started = time.perf_counter()
        self.logger.info(f"Chain '{config.chain}' started: {config.steps} steps, burn-in {config.burn_in}, "
                         f"interval {config.interval}, seed {config.rng_seed}")

        while step < config.steps:
            partition = state["partition"]
            before_stats = before_assignment = None
            if fast:
                # Ожидание может перекрыть точки выдачи - нужна статистика текущего плана
                before_stats = evaluate(setup.statistics, partition)
                before_assignment = partition.assignment
            try:
                with self.monitor.trace("runner.step"):
                    if tempering is not None:
                        state = tempering.step()
                        wait = 1
                    else:
                        beta = anneal_beta(setup.schedule, step) if setup.schedule else 0.0
                        advance(state, setup.proposal, setup.chain_rng, beta, self.monitor)
                        wait = state["wait"]
                if config.validate_steps:
                    self._validate(state["partition"])
            except SamplerError as e:
                self.monitor.log_error("runner", type(e).__name__, str(e), {"step": step + 1})
                raise ChainRunError(step + 1, e) from e

            self.monitor.increment("runner", "proposals")
            if not state["accepted"]:
                self.monitor.increment("runner", "self_loops")
            reached = min(step + wait, config.steps)
            while next_emit <= reached:
                emitted += 1
                if next_emit < step + wait:
                    yield self._record(next_emit, partition, emitted, before_stats, before_assignment)
                else:
                    yield self._record(next_emit, state["partition"], emitted)
                next_emit += config.interval
            step = reached

            if step >= next_progress:
                elapsed = time.perf_counter() - started
                self.monitor.record_metric("runner", "steps_per_second", step / max(elapsed, 1e-9))
                self.logger.info(f"Step {step}/{config.steps}: {emitted} records, "
                                 f"cut edges {state['partition'].cut_edge_count}")
                next_progress += Config.PROGRESS_EVERY

        if tempering is not None:
            self.logger.info(f"Tempering finished with {tempering.swaps} accepted swaps, betas={tempering.betas}")
        self.monitor.record_metric("runner", "records", emitted)
        self.monitor.log_report()

    def run(self, handle: TextIO) -> int:
        """Пишет заголовок и все записи в поток; возвращает число записей"""
        iterator = self.records()
        first = next(iterator, None)
        writer = EnsembleWriter(handle, self.header())
        if first is not None:
            writer.write(first)
            for record in iterator:
                writer.write(record)
        self.logger.info(f"Ensemble complete: {writer.records} records")
        return writer.records


def run_chain(config: RunConfig, monitor: Optional[MonitoringService] = None) -> Iterator[EnsembleRecord]:
    """Поток записей ансамбля для конфигурации"""
    return ChainRunner(config, monitor).records()


def run_to_file(config: RunConfig, path: str, monitor: Optional[MonitoringService] = None) -> int:
    with open(path, "w", encoding="utf-8") as handle:
        return ChainRunner(config, monitor).run(handle)
