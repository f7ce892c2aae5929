import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from config import Config
from errors import ChainStuckError, EmptyBoundaryError, ProposalParameterError
from functions.constraints import ConstraintSet
from graph.dual_graph import DualGraph
from graph.partition import Partition, require_boundary
from services.monitoring import MonitoringService
from services.rng import RandomSource

# Настройка логгера
logger = logging.getLogger(__name__)

FLIP_VARIANTS = ("flip", "uniform-flip", "uniform-flip-fast")


@dataclass(frozen=True)
class FlipProposalOutcome:
    next: Partition
    wait: int = 1
    accepted: bool = True
    move: Optional[Tuple[int, int]] = None  # (узел, прежний округ) для принятого переноса

    def __post_init__(self):
        if self.wait < 1:
            raise ValueError("wait must be at least 1")


def default_m(graph: DualGraph) -> float:
    """Каждое ребро дает не более двух пар (узел, округ)"""
    return float(2 * graph.edge_count)


def move_probability(partition: Partition, m: float) -> float:
    """p = |пары| / (M * |V|)"""
    pairs = partition.pair_count
    if pairs == 0:
        raise EmptyBoundaryError("partition has no boundary pairs")
    if m <= 0:
        raise ProposalParameterError("M must be positive")
    p = pairs / (m * partition.graph.node_count)
    if p >= 1.0:
        raise ProposalParameterError(
            f"M={m} is too small: {pairs} pairs exceed M*|V|={m * partition.graph.node_count}"
        )
    return p


def _draw_move(partition: Partition, rng: RandomSource) -> Tuple[int, int]:
    require_boundary(partition)
    return partition.pair_at(rng.randbelow(partition.pair_count))


def node_choice(graph: DualGraph, partition: Partition, rng: RandomSource) -> Partition:
    """
    NodeChoice: равномерно выбирает пару (узел, соседний округ) и переносит узел.
    Разбиение меняется на месте; связность и непустота не гарантируются.
    """
    node, district = _draw_move(partition, rng)
    return partition.flip(node, district, allow_empty=True)


def flip_step(graph: DualGraph, partition: Partition, constraint: ConstraintSet, rng: RandomSource,
              max_attempts: Optional[int] = None, monitor: Optional[MonitoringService] = None) -> Partition:
    """
    Flip: повторяет NodeChoice, пока предложение не пройдет C
    :param max_attempts: Потолок попыток (по умолчанию 10 * число пар)
    :return: То же разбиение, измененное ровно в одном узле
    """
    require_boundary(partition)
    limit = max_attempts or Config.FLIP_RETRY_FACTOR * partition.pair_count
    for attempt in range(1, limit + 1):
        node, district = _draw_move(partition, rng)
        old = partition.label(node)
        partition.flip(node, district, allow_empty=True)
        if constraint.check_flip(graph, partition, node, old):
            if monitor is not None:
                monitor.increment("flip", "constraint_rejections", attempt - 1)
            return partition
        partition.undo()
    raise ChainStuckError(f"no constraint-passing flip found in {limit} draws", attempts=limit)


def _single_proposal(graph: DualGraph, partition: Partition, constraint: ConstraintSet,
                     rng: RandomSource, wait: int) -> FlipProposalOutcome:
    node, district = _draw_move(partition, rng)
    old = partition.label(node)
    partition.flip(node, district, allow_empty=True)
    if constraint.check_flip(graph, partition, node, old):
        return FlipProposalOutcome(partition, wait, True, (node, old))
    partition.undo()
    return FlipProposalOutcome(partition, wait, False)


def uniform_flip_step(graph: DualGraph, partition: Partition, constraint: ConstraintSet, m: float,
                      rng: RandomSource) -> FlipProposalOutcome:
    """
    Uniform Flip: ленивая петля с вероятностью 1-p, иначе одно предложение NodeChoice.
    Отклоненное предложение тоже становится петлей - так переходы симметричны
    и равномерное распределение стационарно.
    """
    p = move_probability(partition, m)
    if not rng.bernoulli(p):
        return FlipProposalOutcome(partition, 1, False)
    return _single_proposal(graph, partition, constraint, rng, 1)


def uniform_flip_fast_step(graph: DualGraph, partition: Partition, constraint: ConstraintSet, m: float,
                           rng: RandomSource) -> FlipProposalOutcome:
    """
    Ускоренный Uniform Flip: ожидание sigma ~ Geometric с вероятностью петли 1-p,
    затем одно предложение. Каждое состояние засчитывается wait раз.
    """
    p = move_probability(partition, m)
    wait = rng.geometric(1.0 - p)
    return _single_proposal(graph, partition, constraint, rng, wait)


class FlipProposal:
    """Настроенное предложение семейства Flip для раннера"""

    def __init__(self, graph: DualGraph, constraint: ConstraintSet, variant: str = "flip",
                 m: Optional[float] = None, monitor: Optional[MonitoringService] = None):
        if variant not in FLIP_VARIANTS:
            raise ValueError(f"unknown flip variant '{variant}'")
        self.graph = graph
        self.constraint = constraint
        self.variant = variant
        self.m = default_m(graph) if m is None else m
        self.monitor = monitor
        self.logger = logging.getLogger("flip_proposal")

    def propose(self, partition: Partition, rng: RandomSource) -> FlipProposalOutcome:
        if self.variant == "flip":
            flip_step(self.graph, partition, self.constraint, rng, monitor=self.monitor)
            return FlipProposalOutcome(partition, 1, True)
        if self.variant == "uniform-flip":
            return uniform_flip_step(self.graph, partition, self.constraint, self.m, rng)
        return uniform_flip_fast_step(self.graph, partition, self.constraint, self.m, rng)
