import logging
from collections import deque
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from errors import EmptyBoundaryError, EmptyDistrictError, GraphValidationError
from functions.union_find import DisjointSet
from graph.dual_graph import DualGraph
from graph.indexed_set import IndexedSet

# Настройка логгера
logger = logging.getLogger(__name__)

UNASSIGNED = 0


class Partition:
    """
    Разбиение узлов графа на k округов с метками 1..k.

    Население округов, разрезанные ребра, граничные узлы и множество пар
    (узел, соседний округ) поддерживаются инкрементально при каждом
    перемещении узла. Объект изменяемый и принадлежит одному владельцу.
    """

    __slots__ = (
        "graph", "_k", "_stride", "_assignment", "_populations", "_sizes",
        "_cut_edges", "_cut_degree", "_boundary", "_pair_mult", "_pairs", "_undo",
    )

    def __init__(self, graph: DualGraph, assignment: Sequence[int], k: Optional[int] = None):
        labels = [int(label) for label in assignment]
        if len(labels) != graph.node_count:
            raise GraphValidationError("assignment must label every node")
        if k is None:
            k = max(labels)
        if any(not 1 <= label <= k for label in labels):
            raise GraphValidationError(f"district labels must lie in 1..{k}")

        self.graph = graph
        self._k = k
        self._stride = k + 1
        self._assignment = labels
        self._populations = [0] * (k + 1)
        self._sizes = [0] * (k + 1)
        population = graph.population
        for v, label in enumerate(labels):
            self._populations[label] += population[v]
            self._sizes[label] += 1
        for district in range(1, k + 1):
            if self._sizes[district] == 0:
                raise GraphValidationError(f"district {district} is empty")
        self._undo: Optional[Dict[int, int]] = None
        self._rebuild_boundary()

    def _rebuild_boundary(self) -> None:
        """Полный пересчет разреза, границы и пар"""
        n = self.graph.node_count
        assignment = self._assignment
        stride = self._stride
        self._cut_edges: IndexedSet[int] = IndexedSet()
        self._cut_degree = [0] * n
        self._pair_mult: Dict[int, int] = {}
        self._pairs: IndexedSet[int] = IndexedSet()
        for eid, (u, v) in enumerate(self.graph.edges):
            a, b = assignment[u], assignment[v]
            if a != b:
                self._cut_edges.add(eid)
                self._cut_degree[u] += 1
                self._cut_degree[v] += 1
                self._add_pair(u * stride + b)
                self._add_pair(v * stride + a)
        self._boundary = {v for v in range(n) if self._cut_degree[v]}

    # ------------------------------
    # Мультимножество пар (узел, округ)
    # ------------------------------

    def _add_pair(self, key: int) -> None:
        count = self._pair_mult.get(key, 0)
        if count == 0:
            self._pairs.add(key)
        self._pair_mult[key] = count + 1

    def _remove_pair(self, key: int) -> None:
        count = self._pair_mult[key] - 1
        if count:
            self._pair_mult[key] = count
        else:
            del self._pair_mult[key]
            self._pairs.discard(key)

    # ------------------------------
    # Свойства
    # ------------------------------

    @property
    def k(self) -> int:
        return self._k

    @property
    def assignment(self) -> Tuple[int, ...]:
        return tuple(self._assignment)

    def label(self, node: int) -> int:
        return self._assignment[node]

    def population_of(self, district: int) -> int:
        return self._populations[district]

    def size_of(self, district: int) -> int:
        return self._sizes[district]

    @property
    def has_empty_district(self) -> bool:
        return min(self._sizes[1:]) == 0

    @property
    def cut_edges(self) -> FrozenSet[Tuple[int, int]]:
        edges = self.graph.edges
        return frozenset(edges[eid] for eid in self._cut_edges)

    @property
    def cut_edge_ids(self) -> IndexedSet:
        return self._cut_edges

    @property
    def cut_edge_count(self) -> int:
        return len(self._cut_edges)

    @property
    def boundary_nodes(self) -> FrozenSet[int]:
        return frozenset(self._boundary)

    @property
    def pair_count(self) -> int:
        """Число различных пар (узел, соседний округ)"""
        return len(self._pairs)

    @property
    def boundary_pairs(self) -> List[Tuple[int, int]]:
        stride = self._stride
        return sorted(divmod(key, stride) for key in self._pairs)

    def pair_at(self, index: int) -> Tuple[int, int]:
        return divmod(self._pairs[index], self._stride)

    def district_nodes(self, district: int) -> List[int]:
        return [v for v, label in enumerate(self._assignment) if label == district]

    def canonical(self) -> Tuple[int, ...]:
        """Метки, перенумерованные в порядке первого появления"""
        return canonicalize(self._assignment)

    # ------------------------------
    # Изменения
    # ------------------------------

    def flip(self, node: int, district: int, allow_empty: bool = False) -> "Partition":
        """
        Переносит один узел в другой округ на месте
        :param node: Узел
        :param district: Новая метка
        :param allow_empty: Разрешить опустошение исходного округа (для NodeChoice)
        :return: self
        """
        old = self._assignment[node]
        if district == old:
            raise ValueError(f"node {node} already belongs to district {district}")
        if not 1 <= district <= self._k:
            raise ValueError(f"district {district} outside 1..{self._k}")
        if self._sizes[old] == 1 and not allow_empty:
            raise EmptyDistrictError(old, node)
        self._move(node, district)
        self._undo = {node: old}
        return self

    def reassign(self, changes: Mapping[int, int]) -> "Partition":
        """Массовая перемаркировка; опустошение округа откатывается с ошибкой"""
        undo = {}
        assignment = self._assignment
        for node, district in changes.items():
            old = assignment[node]
            if old != district:
                undo[node] = old
                self._move(node, district)
        if self.has_empty_district:
            empty = next(d for d in range(1, self._k + 1) if self._sizes[d] == 0)
            for node, old in undo.items():
                self._move(node, old)
            raise EmptyDistrictError(empty)
        self._undo = undo
        return self

    def undo(self) -> "Partition":
        """Откатывает последнее изменение (flip или reassign)"""
        if self._undo:
            for node, old in self._undo.items():
                self._move(node, old)
        self._undo = None
        return self

    def _move(self, node: int, new: int) -> None:
        assignment = self._assignment
        old = assignment[node]
        stride = self._stride
        cut_degree = self._cut_degree
        boundary = self._boundary
        cut_edges = self._cut_edges
        graph = self.graph
        for w, eid in zip(graph.adjacency[node], graph.incident_edges[node]):
            c = assignment[w]
            if c != old:
                self._remove_pair(node * stride + c)
                self._remove_pair(w * stride + old)
                if c == new:
                    cut_edges.discard(eid)
                    cut_degree[node] -= 1
                    cut_degree[w] -= 1
                    if not cut_degree[w]:
                        boundary.discard(w)
            if c != new:
                self._add_pair(node * stride + c)
                self._add_pair(w * stride + new)
                if c == old:
                    cut_edges.add(eid)
                    cut_degree[node] += 1
                    cut_degree[w] += 1
                    boundary.add(w)
        if cut_degree[node]:
            boundary.add(node)
        else:
            boundary.discard(node)
        weight = graph.population[node]
        self._populations[old] -= weight
        self._populations[new] += weight
        self._sizes[old] -= 1
        self._sizes[new] += 1
        assignment[node] = new

    # ------------------------------
    # Копирование и сверка
    # ------------------------------

    def copy(self) -> "Partition":
        clone = object.__new__(Partition)
        clone.graph = self.graph
        clone._k = self._k
        clone._stride = self._stride
        clone._assignment = list(self._assignment)
        clone._populations = list(self._populations)
        clone._sizes = list(self._sizes)
        clone._cut_edges = self._cut_edges.copy()
        clone._cut_degree = list(self._cut_degree)
        clone._boundary = set(self._boundary)
        clone._pair_mult = dict(self._pair_mult)
        clone._pairs = self._pairs.copy()
        clone._undo = None
        return clone

    def recompute(self) -> "Partition":
        """Новое разбиение с производными величинами, пересчитанными с нуля"""
        fresh = object.__new__(Partition)
        fresh.graph = self.graph
        fresh._k = self._k
        fresh._stride = self._stride
        fresh._assignment = list(self._assignment)
        fresh._populations = [0] * (self._k + 1)
        fresh._sizes = [0] * (self._k + 1)
        for v, label in enumerate(fresh._assignment):
            fresh._populations[label] += self.graph.population[v]
            fresh._sizes[label] += 1
        fresh._undo = None
        fresh._rebuild_boundary()
        return fresh

    def matches_recomputation(self) -> bool:
        fresh = self.recompute()
        return (
            set(self._cut_edges) == set(fresh._cut_edges)
            and self._boundary == fresh._boundary
            and self._populations == fresh._populations
            and self._sizes == fresh._sizes
            and self._pair_mult == fresh._pair_mult
            and set(self._pairs) == set(fresh._pairs)
            and self._cut_degree == fresh._cut_degree
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.graph is other.graph and self._k == other._k and self._assignment == other._assignment

    __hash__ = None

    def __repr__(self) -> str:
        return f"Partition(k={self._k}, cut_edges={len(self._cut_edges)})"


# ------------------------------
# Операции над разбиением
# ------------------------------

def canonicalize(assignment: Sequence[int]) -> Tuple[int, ...]:
    relabel: Dict[int, int] = {}
    result = []
    for label in assignment:
        if label not in relabel:
            relabel[label] = len(relabel) + 1
        result.append(relabel[label])
    return tuple(result)


def cut_edge_count(partition: Partition) -> int:
    return partition.cut_edge_count


def boundary_node_fraction(partition: Partition) -> float:
    return len(partition.boundary_nodes) / partition.graph.node_count


def population_deviation(partition: Partition, total_population: Optional[int] = None,
                         k: Optional[int] = None) -> float:
    """Максимальное относительное отклонение населения округа от идеала total/k"""
    total = partition.graph.total_population if total_population is None else total_population
    k = partition.k if k is None else k
    if k < 1:
        raise ValueError("k must be at least 1")
    ideal = total / k
    if ideal == 0:
        return 0.0
    return max(abs(partition.population_of(d) - ideal) for d in range(1, partition.k + 1)) / ideal


def within_tolerance(population: float, ideal: float, epsilon: float) -> bool:
    """|population - ideal| <= epsilon * ideal с запасом на округление"""
    return abs(population - ideal) <= epsilon * ideal + 1e-9 * max(ideal, 1.0)


def is_contiguous(graph: DualGraph, partition: Partition) -> bool:
    """Каждый округ индуцирует связный подграф (система непересекающихся множеств)"""
    assignment = partition.assignment
    components = DisjointSet(range(graph.node_count))
    for u, v in graph.edges:
        if assignment[u] == assignment[v]:
            components.union(u, v)
    roots: Dict[int, object] = {}
    for v, label in enumerate(assignment):
        root = components.find(v)
        if roots.setdefault(label, root) != root:
            return False
    return True


def flip_preserves_contiguity(graph: DualGraph, partition: Partition, node: int, old_district: int) -> bool:
    """
    Локальная проверка связности округа, который покинул узел.

    Предполагается, что до перемещения округ был связен: достаточно убедиться,
    что бывшие соседи узла внутри округа по-прежнему достижимы друг из друга.
    """
    assignment = partition._assignment
    targets = [w for w in graph.adjacency[node] if assignment[w] == old_district]
    if len(targets) <= 1:
        return True
    remaining = set(targets[1:])
    seen = {targets[0]}
    queue = deque([targets[0]])
    adjacency = graph.adjacency
    while queue:
        v = queue.popleft()
        for w in adjacency[v]:
            if w not in seen and assignment[w] == old_district:
                if w in remaining:
                    remaining.discard(w)
                    if not remaining:
                        return True
                seen.add(w)
                queue.append(w)
    return False


def apply_flip(partition: Partition, node: int, new_district: int) -> Partition:
    """Функциональная форма переноса: возвращает измененную копию"""
    return partition.copy().flip(node, new_district)


def require_boundary(partition: Partition) -> None:
    if partition.pair_count == 0:
        raise EmptyBoundaryError("partition has no cut edges to propose moves across")
