import logging
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from config import Config
from errors import OracleSizeError
from chains.spanning_tree import SpanningTree, find_balanced_cuts
from functions.constraints import ConstraintSet, check
from functions.tree_counting import spanning_tree_count_exact
from functions.union_find import DisjointSet
from graph.dual_graph import DualGraph
from graph.partition import Partition, canonicalize

# Настройка логгера
logger = logging.getLogger(__name__)

State = Tuple[int, ...]
Distribution = Dict[Hashable, float]


@dataclass
class StateSpace:
    """Перечень канонических допустимых разбиений малого графа"""

    graph: DualGraph
    k: int
    states: List[State]
    index: Dict[State, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {state: i for i, state in enumerate(self.states)}
        if len(self.index) != len(self.states):
            raise ValueError("state space contains duplicate states")

    def __len__(self) -> int:
        return len(self.states)

    def __contains__(self, assignment: Sequence[int]) -> bool:
        return canonicalize(assignment) in self.index

    def index_of(self, assignment: Sequence[int]) -> Optional[int]:
        return self.index.get(canonicalize(assignment))

    def partition(self, i: int) -> Partition:
        return Partition(self.graph, self.states[i], self.k)


@dataclass
class TransitionMatrix:
    space: StateSpace
    matrix: np.ndarray

    def is_stochastic(self, tolerance: float = 1e-12) -> bool:
        return bool(np.all(self.matrix >= 0) and np.allclose(self.matrix.sum(axis=1), 1.0, atol=tolerance, rtol=0))

    def components(self) -> List[List[int]]:
        """Сильно связные компоненты графа переходов"""
        digraph = nx.DiGraph()
        digraph.add_nodes_from(range(len(self.space)))
        rows, cols = np.nonzero(self.matrix)
        digraph.add_edges_from((int(i), int(j)) for i, j in zip(rows, cols) if i != j)
        return sorted(sorted(component) for component in nx.strongly_connected_components(digraph))

    @property
    def is_irreducible(self) -> bool:
        return len(self.components()) == 1

    def stationary(self, method: str = "solve", tolerance: float = 1e-14, max_iterations: int = 1_000_000) -> np.ndarray:
        """
        Стационарный вектор pi = pi X
        :param method: solve - линейная система с условием нормировки; power - степенной метод
        """
        size = len(self.space)
        if method == "solve":
            system = np.vstack([self.matrix.T - np.eye(size), np.ones((1, size))])
            rhs = np.zeros(size + 1)
            rhs[-1] = 1.0
            pi, *_ = np.linalg.lstsq(system, rhs, rcond=None)
            pi = np.clip(pi, 0.0, None)
            return pi / pi.sum()
        if method == "power":
            pi = np.full(size, 1.0 / size)
            for _ in range(max_iterations):
                updated = pi @ self.matrix
                if np.abs(updated - pi).sum() < tolerance:
                    return updated
                pi = updated
            logger.warning(f"Power iteration did not converge in {max_iterations} iterations")
            return pi
        raise ValueError(f"unknown stationary method '{method}'")

    def offdiagonal_symmetric(self, tolerance: float = 1e-12) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.allclose(off, off.T, atol=tolerance, rtol=0))


# ------------------------------
# Перечисление разбиений
# ------------------------------

def _restricted_growth_strings(n: int, k: int) -> Iterable[State]:
    """Все разметки 1..k в порядке первого появления, использующие ровно k меток"""
    labels = [0] * n

    def extend(position: int, used: int):
        if n - position < k - used:
            return
        if position == n:
            if used == k:
                yield tuple(labels)
            return
        for label in range(1, min(used + 1, k) + 1):
            labels[position] = label
            yield from extend(position + 1, max(used, label))

    yield from extend(0, 0)


def enumerate_partitions(graph: DualGraph, k: int,
                         constraint_set: Optional[ConstraintSet] = None) -> StateSpace:
    """
    Все связные разбиения на k округов, проходящие ограничения
    :raises OracleSizeError: k^n превышает предел перебора
    """
    n = graph.node_count
    if k < 1 or k > n:
        raise ValueError(f"cannot split {n} nodes into {k} districts")
    if k ** n > Config.ORACLE_MAX_LABELINGS:
        raise OracleSizeError(f"{k}^{n} labelings exceed the oracle limit of {Config.ORACLE_MAX_LABELINGS}")
    constraint_set = constraint_set or ConstraintSet()
    if not constraint_set.require_contiguity:
        raise ValueError("oracle state spaces are contiguous by construction")

    states = [
        labels for labels in _restricted_growth_strings(n, k)
        if check(constraint_set, graph, Partition(graph, labels, k))
    ]
    logger.info(f"Enumerated {len(states)} states for n={n}, k={k}")
    return StateSpace(graph, k, states)


def valid_moves(space: StateSpace, i: int) -> List[int]:
    """Индексы состояний, достижимых одним допустимым переносом (с повторами)"""
    partition = space.partition(i)
    targets = []
    for node, district in partition.boundary_pairs:
        partition.flip(node, district, allow_empty=True)
        j = space.index_of(partition.assignment)
        partition.undo()
        if j is not None:
            targets.append(j)
    return targets


def flip_matrix(graph: DualGraph, space: StateSpace, variant: str = "flip",
                m: Optional[float] = None) -> TransitionMatrix:
    """
    Точная матрица переходов Flip или Uniform Flip на перечисленном пространстве
    :param variant: flip - равномерно по допустимым переносам; uniform - 1/(M|V|) на перенос
    :param m: M для uniform; по умолчанию uniform_flip_m(space)
    """
    if variant not in ("flip", "uniform"):
        raise ValueError(f"unknown oracle flip variant '{variant}'")
    size = len(space)
    n = graph.node_count
    matrix = np.zeros((size, size))
    moves = [valid_moves(space, i) for i in range(size)]

    if variant == "uniform":
        if m is None:
            m = uniform_flip_m(space)
        step = 1.0 / (m * n)
        for i, targets in enumerate(moves):
            if len(targets) * step > 1.0 + 1e-12:
                raise ValueError("M is too small for this state space")
            for j in targets:
                matrix[i, j] += step
            matrix[i, i] += 1.0 - len(targets) * step
    else:
        for i, targets in enumerate(moves):
            if not targets:
                matrix[i, i] = 1.0
                continue
            for j in targets:
                matrix[i, j] += 1.0 / len(targets)

    result = TransitionMatrix(space, matrix)
    components = result.components()
    if len(components) > 1:
        logger.warning(f"Flip chain graph has {len(components)} components")
    return result


def move_counts(space: StateSpace) -> np.ndarray:
    """Число допустимых переносов каждого состояния (степень в графе состояний)"""
    return np.array([len(valid_moves(space, i)) for i in range(len(space))], dtype=float)


def pair_counts(space: StateSpace) -> np.ndarray:
    return np.array([space.partition(i).pair_count for i in range(len(space))], dtype=float)


def uniform_flip_m(space: StateSpace) -> float:
    """M = (наибольшее число пар + 1) / |V|: p < 1 в каждом состоянии пространства"""
    return (pair_counts(space).max() + 1) / space.graph.node_count


def proposal_matrix(space: StateSpace) -> TransitionMatrix:
    """
    Одно предложение NodeChoice с отказом в петлю: цепь скачков
    ускоренного Uniform Flip (ожидания вынесены в веса)
    """
    size = len(space)
    matrix = np.zeros((size, size))
    for i, pairs in enumerate(pair_counts(space)):
        targets = valid_moves(space, i)
        for j in targets:
            matrix[i, j] += 1.0 / pairs
        matrix[i, i] += 1.0 - len(targets) / pairs
    return TransitionMatrix(space, matrix)


def wait_weighted_occupancy(space: StateSpace, jump: np.ndarray, credit: str = "before") -> np.ndarray:
    """
    Доли шагов ускоренного Uniform Flip по состояниям при мере скачков jump.
    Среднее ожидание в состоянии i равно M|V| / пары_i; множитель M|V| сокращается.
    :param credit: before - ожидание засчитывается состоянию, в котором оно вытянуто;
                   after - следующему состоянию
    """
    weights = np.asarray(jump, dtype=float) / pair_counts(space)
    if credit == "after":
        weights = weights @ proposal_matrix(space).matrix
    elif credit != "before":
        raise ValueError(f"unknown credit mode '{credit}'")
    return weights / weights.sum()


# ------------------------------
# Остовные деревья
# ------------------------------

def enumerate_spanning_trees(graph: DualGraph, node_subset: Optional[Iterable[int]] = None) -> List[frozenset]:
    """
    Все остовные деревья индуцированного подграфа перебором наборов ребер
    :return: Список множеств ребер (u, v) с u < v
    """
    nodes = sorted(range(graph.node_count) if node_subset is None else set(node_subset))
    if len(nodes) > Config.ORACLE_MAX_TREE_NODES:
        raise OracleSizeError(f"tree enumeration limited to {Config.ORACLE_MAX_TREE_NODES} nodes")
    members = set(nodes)
    edges = [(u, v) for u, v in graph.edges if u in members and v in members]
    trees = []
    for subset in combinations(edges, len(nodes) - 1):
        components = DisjointSet(nodes)
        if all(components.union(u, v) for u, v in subset):
            trees.append(frozenset(subset))
    return trees


def count_spanning_trees_deletion_contraction(node_count: int, edges: Iterable[Tuple[int, int]]) -> int:
    """
    Число остовных деревьев мультиграфа по рекурсии tau(G) = tau(G - e) + m * tau(G / e),
    где m - кратность ребра e
    """
    multiplicity = Counter()
    for u, v in edges:
        if u != v:
            multiplicity[(min(u, v), max(u, v))] += 1
    return _deletion_contraction(frozenset(range(node_count)), multiplicity)


def _deletion_contraction(nodes: frozenset, multiplicity: Counter) -> int:
    if len(nodes) == 1:
        return 1
    components = DisjointSet(nodes)
    for u, v in multiplicity:
        components.union(u, v)
    if len(components.groups()) > 1:
        return 0

    (u, v), count = next(iter(multiplicity.items()))
    deleted = Counter(multiplicity)
    del deleted[(u, v)]

    # Стягивание v в u: кратные ребра складываются, петли исчезают
    contracted: Counter = Counter()
    for (a, b), c in multiplicity.items():
        a, b = (u if a == v else a), (u if b == v else b)
        if a != b:
            contracted[(min(a, b), max(a, b))] += c
    return _deletion_contraction(nodes, deleted) + count * _deletion_contraction(nodes - {v}, contracted)


def _split_key(assignment: Sequence[int]) -> State:
    return canonicalize(assignment)


def _split_of(graph: DualGraph, side: Iterable[int]) -> State:
    members = set(side)
    return _split_key([1 if v in members else 2 for v in range(graph.node_count)])


def tree_cut_distribution(graph: DualGraph, epsilon: float) -> Distribution:
    """
    Точное распределение бипартиций одного шага ReCom по всему графу:
    равномерное дерево, равномерное сбалансированное ребро, отбраковка деревьев
    без сбалансированных ребер
    """
    nodes = list(range(graph.node_count))
    ideal = graph.total_population / 2
    weights = {v: graph.population[v] for v in nodes}
    mass: Dict[State, float] = {}
    for edge_set in enumerate_spanning_trees(graph):
        tree = SpanningTree.from_edges(nodes, edge_set, weights)
        cuts = find_balanced_cuts(tree, ideal, epsilon)
        for child, _ in cuts:
            split = _split_of(graph, tree.subtree_nodes(child))
            mass[split] = mass.get(split, 0.0) + 1.0 / len(cuts)
    total = sum(mass.values())
    if total == 0:
        return {}
    return {split: value / total for split, value in sorted(mass.items())}


def tree_projection_counts(graph: DualGraph, epsilon: float) -> Dict[State, Dict[str, int]]:
    """
    Для каждой сбалансированной бипартиции: произведение tau(H1) * tau(H2) * |E(H1, H2)|
    и число пар (дерево, ребро), проецирующихся на нее
    """
    nodes = list(range(graph.node_count))
    ideal = graph.total_population / 2
    weights = {v: graph.population[v] for v in nodes}
    incidences: Counter = Counter()
    for edge_set in enumerate_spanning_trees(graph):
        tree = SpanningTree.from_edges(nodes, edge_set, weights)
        for child, _ in find_balanced_cuts(tree, ideal, epsilon):
            incidences[_split_of(graph, tree.subtree_nodes(child))] += 1

    result: Dict[State, Dict[str, int]] = {}
    for split, count in sorted(incidences.items()):
        first = [v for v, label in enumerate(split) if label == 1]
        second = [v for v, label in enumerate(split) if label == 2]
        crossing = sum(1 for u, v in graph.edges if split[u] != split[v])
        product = spanning_tree_count_exact(graph, first) * spanning_tree_count_exact(graph, second) * crossing
        result[split] = {"product": product, "incidences": count}
    return result


# ------------------------------
# Эмпирические распределения
# ------------------------------

def empirical_distribution(samples: Iterable[Hashable], weights: Optional[Iterable[float]] = None) -> Distribution:
    """
    Частоты наблюдений; последовательности меток канонизируются
    :param weights: Кратности (например, ожидания быстрого Uniform Flip)
    """
    counts: Dict[Hashable, float] = {}
    weight_iter = iter(weights) if weights is not None else None
    for sample in samples:
        key = canonicalize(sample) if isinstance(sample, (tuple, list)) else sample
        weight = next(weight_iter) if weight_iter is not None else 1.0
        counts[key] = counts.get(key, 0.0) + weight
    total = sum(counts.values())
    if total == 0:
        return {}
    return {key: value / total for key, value in counts.items()}


def total_variation(empirical: Union[Mapping, Sequence[float]], exact: Union[Mapping, Sequence[float]]) -> float:
    """1/2 * sum |p_i - q_i|; словари сравниваются по объединению носителей"""
    if isinstance(empirical, Mapping) and isinstance(exact, Mapping):
        keys = set(empirical) | set(exact)
        return 0.5 * sum(abs(empirical.get(key, 0.0) - exact.get(key, 0.0)) for key in keys)
    p = np.asarray(empirical, dtype=float)
    q = np.asarray(exact, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions must share a support")
    return float(0.5 * np.abs(p - q).sum())
