import logging
from typing import List, Optional

from config import Config
from errors import InfeasibleMergeError, SeedingError
from chains.recom import TreePartitioner
from graph.dual_graph import DualGraph
from graph.partition import Partition, UNASSIGNED, within_tolerance
from services.rng import RandomSource

# Настройка логгера
logger = logging.getLogger(__name__)


def _check_request(graph: DualGraph, k: int, epsilon: float) -> None:
    if k < 1 or k > graph.node_count:
        raise SeedingError(f"cannot build {k} districts on {graph.node_count} nodes")
    if not 0 <= epsilon < 1:
        raise SeedingError("epsilon must lie in [0, 1)")


def recursive_tree_seed(graph: DualGraph, k: int, epsilon: float, rng: RandomSource,
                        max_attempts: Optional[int] = None, max_tree_redraws: Optional[int] = None) -> Partition:
    """
    Начальный план: остовное дерево всего графа, от которого рекурсивно
    отрезаются поддеревья размером с округ (total/k с допуском epsilon)
    :raises SeedingError: исчерпан потолок попыток
    """
    _check_request(graph, k, epsilon)
    attempts = max_attempts or Config.SEED_MAX_ATTEMPTS
    partitioner = TreePartitioner(epsilon, max_tree_redraws, max_attempts=attempts)
    target = graph.total_population / k
    try:
        groups = partitioner(graph, list(range(graph.node_count)), k, rng, target=target)
    except InfeasibleMergeError:
        raise SeedingError(f"recursive tree seeding failed after {attempts} attempts (k={k}, epsilon={epsilon})") from None

    assignment = [UNASSIGNED] * graph.node_count
    for label, group in enumerate(groups, start=1):
        for v in group:
            assignment[v] = label
    logger.info(f"Recursive tree seed built in {partitioner.last_attempts} attempt(s)")
    return Partition(graph, assignment, k)


def flood_fill_seed(graph: DualGraph, k: int, epsilon: float, rng: RandomSource,
                    max_restarts: Optional[int] = None) -> Partition:
    """
    Жадная агломерация: k округов растут от случайных узлов, на каждом шаге
    наименьший округ забирает случайного свободного соседа. Тупик или выход
    за допуск - план бросается и строится заново.
    """
    _check_request(graph, k, epsilon)
    limit = max_restarts or Config.FLOOD_FILL_MAX_RESTARTS
    ideal = graph.total_population / k
    for restart in range(limit + 1):
        assignment = _grow_districts(graph, k, ideal * (1 + epsilon), rng)
        if assignment is None:
            continue
        partition = Partition(graph, assignment, k)
        if all(within_tolerance(partition.population_of(d), ideal, epsilon) for d in range(1, k + 1)):
            logger.info(f"Flood-fill seed built after {restart} restart(s)")
            return partition
    raise SeedingError(f"flood-fill seeding failed after {limit} restarts (k={k}, epsilon={epsilon})")


def _grow_districts(graph: DualGraph, k: int, upper: float, rng: RandomSource) -> Optional[List[int]]:
    n = graph.node_count
    assignment = [UNASSIGNED] * n
    population = graph.population

    seeds: List[int] = []
    while len(seeds) < k:
        v = rng.randbelow(n)
        if v not in seeds:
            seeds.append(v)

    totals = [0.0] * (k + 1)
    frontiers: List[List[int]] = [[] for _ in range(k + 1)]
    unassigned = n
    for label, v in enumerate(seeds, start=1):
        assignment[v] = label
        totals[label] = population[v]
        unassigned -= 1
    for label, v in enumerate(seeds, start=1):
        frontiers[label].extend(w for w in graph.adjacency[v] if assignment[w] == UNASSIGNED)

    while unassigned:
        # Наименьший округ, у которого еще есть свободные соседи
        grown = False
        for label in sorted(range(1, k + 1), key=lambda d: (totals[d], d)):
            frontier = frontiers[label]
            # Ленивое удаление уже занятых узлов
            while frontier:
                index = rng.randbelow(len(frontier))
                v = frontier[index]
                frontier[index] = frontier[-1]
                frontier.pop()
                if assignment[v] == UNASSIGNED:
                    break
            else:
                continue
            if totals[label] + population[v] > upper:
                frontier.append(v)
                continue
            assignment[v] = label
            totals[label] += population[v]
            unassigned -= 1
            frontier.extend(w for w in graph.adjacency[v] if assignment[w] == UNASSIGNED)
            grown = True
            break
        if not grown:
            return None
    return assignment
