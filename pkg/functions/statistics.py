import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats as scipy_stats

from errors import GraphValidationError, ZeroDenominatorError
from functions.tree_counting import log_partition_tree_score
from graph.dual_graph import DualGraph
from graph.partition import Partition, boundary_node_fraction, population_deviation
from services.cache_service import CacheService

# Настройка логгера
logger = logging.getLogger(__name__)

Statistic = Callable[[Partition], Any]


@dataclass(frozen=True)
class ElectionSpec:
    """
    Выборы, заданные столбцами атрибутов.
    Если party_b не задан, голоса B = total - A (режим дополнения).
    """

    party_a: str
    party_b: Optional[str] = None
    total: Optional[str] = None
    name: str = "election"

    def __post_init__(self):
        if (self.party_b is None) == (self.total is None):
            raise ValueError("election needs exactly one of party_b or total")

    def votes(self, graph: DualGraph) -> Tuple[np.ndarray, np.ndarray]:
        votes_a = graph.column(self.party_a)
        if self.party_b is not None:
            votes_b = graph.column(self.party_b)
        else:
            votes_b = graph.column(self.total) - votes_a
        if np.any(votes_a < 0) or np.any(votes_b < 0):
            raise GraphValidationError(f"election '{self.name}' has negative vote counts")
        return votes_a, votes_b


@dataclass(frozen=True)
class ElectionResult:
    wins: int
    losses: int
    ties: int
    tied_districts: Tuple[int, ...] = field(default_factory=tuple)


def district_sums(partition: Partition, values: np.ndarray) -> np.ndarray:
    """Суммы значений по округам 1..k"""
    labels = np.asarray(partition.assignment)
    return np.bincount(labels, weights=values, minlength=partition.k + 1)[1:]


def election_results(graph: DualGraph, partition: Partition, election: ElectionSpec) -> ElectionResult:
    votes_a, votes_b = election.votes(graph)
    sums_a = district_sums(partition, votes_a)
    sums_b = district_sums(partition, votes_b)
    wins = int(np.sum(sums_a > sums_b))
    ties = np.flatnonzero(sums_a == sums_b) + 1
    return ElectionResult(
        wins=wins,
        losses=partition.k - wins - len(ties),
        ties=len(ties),
        tied_districts=tuple(int(d) for d in ties),
    )


def seats_won(graph: DualGraph, partition: Partition, election: ElectionSpec) -> int:
    """Число округов, где A строго больше B; ничьи не засчитываются"""
    result = election_results(graph, partition, election)
    if result.ties:
        logger.debug(f"Election '{election.name}' tied in districts {result.tied_districts}")
    return result.wins


def district_shares(graph: DualGraph, partition: Partition, numerator_column: str,
                    denominator_column: str) -> List[float]:
    """
    Доля группы в каждом округе по возрастанию
    :raises ZeroDenominatorError: знаменатель округа равен нулю
    """
    numerator = district_sums(partition, graph.column(numerator_column))
    denominator = district_sums(partition, graph.column(denominator_column))
    zero = np.flatnonzero(denominator <= 0)
    if len(zero):
        raise ZeroDenominatorError(int(zero[0]) + 1, denominator_column)
    return sorted((numerator / denominator).tolist())


def mean_median(shares: Sequence[float]) -> float:
    """Медиана минус среднее"""
    if len(shares) == 0:
        raise ValueError("mean-median needs at least one share")
    values = np.asarray(shares, dtype=float)
    return float(np.median(values) - np.mean(values))


def units_split(graph: DualGraph, partition: Partition, unit_column: str) -> int:
    """Число единиц (округов-графств и т.п.), узлы которых попали в два и более округа"""
    frame = pd.DataFrame({"unit": graph.column(unit_column), "district": partition.assignment})
    return int((frame.groupby("unit")["district"].nunique() > 1).sum())


def assignment_overlap(first: Union[Partition, Sequence[int]], second: Union[Partition, Sequence[int]]) -> float:
    """Доля узлов с одинаковой меткой в двух планах"""
    a = np.asarray(first.assignment if isinstance(first, Partition) else first)
    b = np.asarray(second.assignment if isinstance(second, Partition) else second)
    if a.shape != b.shape:
        raise ValueError("assignments must cover the same nodes")
    return float(np.mean(a == b))


def percentile_rank(values: Sequence[float], observed: float) -> float:
    """Процентиль наблюдаемого значения в ансамбле (ничьи делятся пополам)"""
    if len(values) == 0:
        raise ValueError("percentile rank needs a nonempty ensemble")
    return float(scipy_stats.percentileofscore(np.asarray(values, dtype=float), observed, kind="mean"))


# ------------------------------
# Реестр статистик
# ------------------------------

STATISTIC_NAMES = (
    "cut_edges", "cut_edge_fraction", "boundary_fraction", "population_deviation",
    "seats", "seats_tied", "shares", "max_share", "mean_median",
    "units_split", "tree_score", "seed_overlap",
)


@dataclass
class StatisticContext:
    graph: DualGraph
    election: Optional[ElectionSpec] = None
    share_numerator: Optional[str] = None
    share_denominator: Optional[str] = None
    unit_column: Optional[str] = None
    seed_assignment: Optional[Sequence[int]] = None
    cache: Optional[CacheService] = None


def _require(value: Any, name: str, what: str) -> Any:
    if value is None:
        raise ValueError(f"statistic '{name}' requires {what}")
    return value


def election_shares(graph: DualGraph, partition: Partition, election: ElectionSpec) -> List[float]:
    """Доля голосов A от суммы голосов A и B по округам, по возрастанию"""
    votes_a, votes_b = election.votes(graph)
    sums_a = district_sums(partition, votes_a)
    totals = sums_a + district_sums(partition, votes_b)
    zero = np.flatnonzero(totals <= 0)
    if len(zero):
        raise ZeroDenominatorError(int(zero[0]) + 1, election.name)
    return sorted((sums_a / totals).tolist())


def _share_source(context: StatisticContext, name: str) -> Callable[[Partition], List[float]]:
    """Доли по явным столбцам или, если их нет, доли голосов партии A"""
    graph = context.graph
    if context.share_numerator and context.share_denominator:
        numerator, denominator = context.share_numerator, context.share_denominator
        return lambda p: district_shares(graph, p, numerator, denominator)
    election = _require(context.election, name, "share columns or an election")
    return lambda p: election_shares(graph, p, election)


def build_statistics(names: Sequence[str], context: StatisticContext) -> Dict[str, Statistic]:
    """
    Собирает вычислители статистик по именам
    :param names: Имена из STATISTIC_NAMES
    :param context: Граф и столбцы, нужные статистикам
    :return: Упорядоченный словарь имя -> функция от разбиения
    """
    graph = context.graph
    registry: Dict[str, Statistic] = {}

    for name in names:
        if name == "cut_edges":
            registry[name] = lambda p: p.cut_edge_count
        elif name == "cut_edge_fraction":
            registry[name] = lambda p: p.cut_edge_count / graph.edge_count
        elif name == "boundary_fraction":
            registry[name] = boundary_node_fraction
        elif name == "population_deviation":
            registry[name] = population_deviation
        elif name == "seats":
            election = _require(context.election, name, "an election")
            registry[name] = lambda p, e=election: seats_won(graph, p, e)
        elif name == "seats_tied":
            election = _require(context.election, name, "an election")
            registry[name] = lambda p, e=election: election_results(graph, p, e).ties
        elif name == "shares":
            registry[name] = _share_source(context, name)
        elif name == "max_share":
            shares = _share_source(context, name)
            registry[name] = lambda p, s=shares: s(p)[-1]
        elif name == "mean_median":
            shares = _share_source(context, name)
            registry[name] = lambda p, s=shares: mean_median(s(p))
        elif name == "units_split":
            column = _require(context.unit_column, name, "a unit column")
            registry[name] = lambda p, c=column: units_split(graph, p, c)
        elif name == "tree_score":
            cache = context.cache or CacheService()
            registry[name] = lambda p, c=cache: log_partition_tree_score(graph, p, c)
        elif name == "seed_overlap":
            seed = _require(context.seed_assignment, name, "a seed plan")
            registry[name] = lambda p, s=seed: assignment_overlap(p, s)
        else:
            raise ValueError(f"unknown statistic '{name}' (known: {', '.join(STATISTIC_NAMES)})")
    return registry


def evaluate(statistics: Dict[str, Statistic], partition: Partition) -> Dict[str, Any]:
    return {name: statistic(partition) for name, statistic in statistics.items()}
