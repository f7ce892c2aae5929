import logging
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from config import Config
from errors import DisconnectedRegionError, EmptyBoundaryError, InfeasibleMergeError
from functions.constraints import ConstraintSet
from chains.flip import FlipProposalOutcome
from chains.spanning_tree import find_balanced_cuts, find_district_cuts, random_walk_tree
from graph.dual_graph import DualGraph
from graph.partition import Partition
from services.monitoring import MonitoringService
from services.rng import RandomSource

# Настройка логгера
logger = logging.getLogger(__name__)

PAIR_WEIGHTINGS = ("cut-edge", "district-pair", "boundary-length")

# Разбиватель области: (граф, узлы области, число частей, rng) -> список групп узлов
Partitioner = Callable[[DualGraph, List[int], int, RandomSource], List[List[int]]]


@dataclass(frozen=True)
class RecomConfig:
    epsilon: float
    pair_weighting: str = "cut-edge"
    max_tree_redraws: int = Config.MAX_TREE_REDRAWS
    merge_count: int = 2

    def __post_init__(self):
        if not 0 <= self.epsilon < 1:
            raise ValueError("epsilon must lie in [0, 1)")
        if self.pair_weighting not in PAIR_WEIGHTINGS:
            raise ValueError(f"unknown pair weighting '{self.pair_weighting}'")
        if self.max_tree_redraws < 1:
            raise ValueError("max_tree_redraws must be positive")
        if self.merge_count < 2:
            raise ValueError("merge_count must be at least 2")


# ------------------------------
# Выбор сливаемых округов
# ------------------------------

def select_merge_pair(partition: Partition, pair_weighting: str, rng: RandomSource) -> Tuple[int, int]:
    """
    Пара соседних округов:
    cut-edge - равномерно по разрезанным ребрам (пара весится числом общих ребер),
    boundary-length - пропорционально весу ребра (длине общей границы),
    district-pair - равномерно по парам соседних округов.
    """
    cut_ids = partition.cut_edge_ids
    if not len(cut_ids):
        raise EmptyBoundaryError("partition has no cut edges")
    graph = partition.graph

    if pair_weighting == "cut-edge":
        eid = cut_ids[rng.randbelow(len(cut_ids))]
    elif pair_weighting == "boundary-length":
        eid = cut_ids[rng.weighted_index([graph.edge_weights[e] for e in cut_ids])]
    else:
        pairs = sorted({
            tuple(sorted((partition.label(u), partition.label(v))))
            for u, v in (graph.edges[e] for e in cut_ids)
        })
        return pairs[rng.randbelow(len(pairs))]

    u, v = graph.edges[eid]
    a, b = partition.label(u), partition.label(v)
    return (a, b) if a < b else (b, a)


def select_districts(partition: Partition, count: int, rng: RandomSource) -> List[int]:
    """count попарно достижимых округов, выращенных от случайного разрезанного ребра"""
    if count > partition.k:
        raise ValueError(f"cannot merge {count} of {partition.k} districts")
    if count == partition.k:
        return list(range(1, partition.k + 1))

    chosen = list(select_merge_pair(partition, "cut-edge", rng))
    graph = partition.graph
    while len(chosen) < count:
        members = set(chosen)
        frontier = set()
        for eid in partition.cut_edge_ids:
            u, v = graph.edges[eid]
            a, b = partition.label(u), partition.label(v)
            if a in members and b not in members:
                frontier.add(b)
            elif b in members and a not in members:
                frontier.add(a)
        if not frontier:
            raise DisconnectedRegionError(f"districts {sorted(members)} have no further neighbors")
        candidates = sorted(frontier)
        chosen.append(candidates[rng.randbelow(len(candidates))])
    return sorted(chosen)


def match_labels(groups: Sequence[Sequence[int]], labels: Sequence[int], partition: Partition) -> Dict[int, int]:
    """Назначает метки новым группам, максимизируя совпадение с прежними метками"""
    overlaps = []
    for gi, group in enumerate(groups):
        counts = Counter(partition.label(v) for v in group)
        for label in labels:
            overlaps.append((-counts.get(label, 0), gi, label))
    overlaps.sort()

    group_label: Dict[int, int] = {}
    used = set()
    for _, gi, label in overlaps:
        if gi in group_label or label in used:
            continue
        group_label[gi] = label
        used.add(label)
    return {v: group_label[gi] for gi, group in enumerate(groups) for v in group}


# ------------------------------
# Разбиение области деревом
# ------------------------------

def bipartition_region(graph: DualGraph, nodes: Sequence[int], epsilon: float, rng: RandomSource,
                       max_tree_redraws: int, monitor: Optional[MonitoringService] = None) -> List[int]:
    """
    Перерисовывает остовные деревья, пока есть сбалансированное ребро,
    и отрезает равномерно выбранное из них
    :return: Узлы отрезанного поддерева
    """
    nodes = sorted(nodes)
    adjacency = graph.induced_adjacency(nodes)
    weights = {v: graph.population[v] for v in nodes}
    ideal = sum(weights.values()) / 2
    for draw in range(1, max_tree_redraws + 1):
        tree = random_walk_tree(adjacency, nodes, rng, weights)
        cuts = find_balanced_cuts(tree, ideal, epsilon)
        if cuts:
            if monitor is not None:
                monitor.record_metric("recom", "tree_draws", draw)
            child, _ = cuts[rng.randbelow(len(cuts))]
            return tree.subtree_nodes(child)
    raise InfeasibleMergeError((), max_tree_redraws)


class TreePartitioner:
    """
    Разбивает связную область на parts частей с населением (1 +- epsilon) * total/parts,
    последовательно отрезая поддеревья равномерных остовных деревьев.
    """

    def __init__(self, epsilon: float, max_tree_redraws: Optional[int] = None, max_attempts: int = 1):
        self.epsilon = epsilon
        self.max_tree_redraws = max_tree_redraws or Config.MAX_TREE_REDRAWS
        self.max_attempts = max_attempts
        self.logger = logging.getLogger("tree_partitioner")
        self.last_attempts = 0

    def __call__(self, graph: DualGraph, nodes: List[int], parts: int, rng: RandomSource,
                 target: Optional[float] = None) -> List[List[int]]:
        nodes = sorted(nodes)
        if parts == 1:
            return [nodes]
        if target is None:
            target = sum(graph.population[v] for v in nodes) / parts
        for attempt in range(1, self.max_attempts + 1):
            self.last_attempts = attempt
            groups = self._split(graph, nodes, parts, target, rng)
            if groups is not None:
                return groups
            self.logger.debug(f"Tree split attempt {attempt} failed, restarting")
        raise InfeasibleMergeError((), self.max_tree_redraws * self.max_attempts)

    def _split(self, graph: DualGraph, nodes: List[int], parts: int, target: float,
               rng: RandomSource) -> Optional[List[List[int]]]:
        groups: List[List[int]] = []
        remaining = nodes
        population = graph.population
        for left in range(parts, 1, -1):
            adjacency = graph.induced_adjacency(remaining)
            weights = {v: population[v] for v in remaining}
            complement = target if left == 2 else None
            piece = None
            for _ in range(self.max_tree_redraws):
                tree = random_walk_tree(adjacency, remaining, rng, weights)
                cuts = find_district_cuts(tree, target, self.epsilon, complement_target=complement)
                if cuts:
                    child, _ = cuts[rng.randbelow(len(cuts))]
                    piece = tree.subtree_nodes(child)
                    break
            if piece is None:
                return None
            groups.append(sorted(piece))
            taken = set(piece)
            remaining = [v for v in remaining if v not in taken]
        groups.append(remaining)
        return groups


# ------------------------------
# Шаги ReCom
# ------------------------------

def recom_step(graph: DualGraph, partition: Partition, config: RecomConfig, rng: RandomSource,
               monitor: Optional[MonitoringService] = None) -> Partition:
    """
    ReCom с остовным деревом: сливает два соседних округа и разрезает
    их объединение по сбалансированному ребру случайного дерева.
    Разбиение меняется на месте; остальные округа не затрагиваются.
    """
    if partition.k < 2:
        raise EmptyBoundaryError("ReCom needs at least two districts")
    a, b = select_merge_pair(partition, config.pair_weighting, rng)
    nodes = sorted(partition.district_nodes(a) + partition.district_nodes(b))
    try:
        side = bipartition_region(graph, nodes, config.epsilon, rng, config.max_tree_redraws, monitor)
    except InfeasibleMergeError:
        raise InfeasibleMergeError((a, b), config.max_tree_redraws) from None
    taken = set(side)
    other = [v for v in nodes if v not in taken]
    partition.reassign(match_labels([side, other], [a, b], partition))
    logger.debug(f"ReCom merged districts {a} and {b} ({len(nodes)} nodes)")
    return partition


def recom_general(graph: DualGraph, partition: Partition, ell: int, partitioner: Partitioner,
                  rng: RandomSource) -> Partition:
    """
    Общий ReCom: заменяет ell выбранных округов новым ell-разбиением их объединения.
    При ell = k план строится заново целиком.
    """
    labels = select_districts(partition, ell, rng)
    nodes = sorted(v for label in labels for v in partition.district_nodes(label))
    if not graph.is_connected_subset(nodes):
        raise DisconnectedRegionError(f"merged districts {labels} do not form a connected region")
    try:
        groups = partitioner(graph, nodes, ell, rng)
    except InfeasibleMergeError as e:
        raise InfeasibleMergeError(labels, e.redraws) from None
    if len(groups) != ell or sorted(v for group in groups for v in group) != nodes:
        raise ValueError("partitioner must return exactly ell groups covering the merged region")
    partition.reassign(match_labels(groups, labels, partition))
    return partition


class RecomProposal:
    """
    Настроенное предложение ReCom для раннера.
    Если задан набор ограничений, план, не прошедший проверку, откатывается
    и шаг становится петлей.
    """

    def __init__(self, graph: DualGraph, config: RecomConfig, general: bool = False,
                 partitioner: Optional[Partitioner] = None, constraint: Optional[ConstraintSet] = None,
                 monitor: Optional[MonitoringService] = None):
        self.graph = graph
        self.config = config
        self.general = general
        self.partitioner = partitioner or TreePartitioner(config.epsilon, config.max_tree_redraws)
        self.constraint = constraint
        self.monitor = monitor
        self.logger = logging.getLogger("recom_proposal")

    def propose(self, partition: Partition, rng: RandomSource) -> FlipProposalOutcome:
        if self.general:
            recom_general(self.graph, partition, self.config.merge_count, self.partitioner, rng)
        else:
            recom_step(self.graph, partition, self.config, rng, self.monitor)
        if self.constraint is not None and not self.constraint.check_without_contiguity(self.graph, partition):
            partition.undo()
            if self.monitor is not None:
                self.monitor.increment("recom", "constraint_rejections")
            return FlipProposalOutcome(partition, 1, False)
        return FlipProposalOutcome(partition, 1, True)
