import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from errors import GraphValidationError
from graph.dual_graph import DualGraph
from graph.partition import within_tolerance
from services.rng import RandomSource

# Настройка логгера
logger = logging.getLogger(__name__)

TreeEdge = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class SpanningTree:
    """Остовное дерево на подмножестве узлов H, заданное указателями на родителя"""

    root: int
    parent: Mapping[int, Optional[int]]
    node_weights: Mapping[int, int]

    @property
    def nodes(self) -> List[int]:
        return list(self.parent)

    @property
    def edges(self) -> List[TreeEdge]:
        """Ребра (потомок, родитель)"""
        return [(v, p) for v, p in self.parent.items() if p is not None]

    @property
    def total_weight(self) -> int:
        return sum(self.node_weights[v] for v in self.parent)

    def children(self) -> Dict[int, List[int]]:
        result: Dict[int, List[int]] = {v: [] for v in self.parent}
        for v, p in self.parent.items():
            if p is not None:
                result[p].append(v)
        return result

    def traversal_order(self) -> List[int]:
        """Обход в ширину от корня: родитель всегда раньше потомков"""
        children = self.children()
        order = [self.root]
        for v in order:
            order.extend(sorted(children[v]))
        return order

    def subtree_weights(self) -> Dict[int, int]:
        """Вес поддерева каждого узла за один проход снизу вверх"""
        weights = {v: self.node_weights[v] for v in self.parent}
        for v in reversed(self.traversal_order()):
            p = self.parent[v]
            if p is not None:
                weights[p] += weights[v]
        return weights

    def subtree_nodes(self, node: int) -> List[int]:
        children = self.children()
        result = [node]
        for v in result:
            result.extend(children[v])
        return result

    def edge_set(self) -> frozenset:
        return frozenset(frozenset(edge) for edge in self.edges)

    def is_valid(self, graph: DualGraph) -> bool:
        """|H|-1 ребер графа, связное и ацикличное"""
        if len(self.edges) != len(self.parent) - 1:
            return False
        if not all(graph.has_edge(u, v) for u, v in self.edges):
            return False
        return len(self.traversal_order()) == len(self.parent)

    @classmethod
    def from_edges(cls, nodes: Sequence[int], edges: Iterable[Tuple[int, int]],
                   node_weights: Mapping[int, int], root: Optional[int] = None) -> "SpanningTree":
        """Строит указатели на родителя по списку ребер дерева"""
        nodes = list(nodes)
        root = nodes[0] if root is None else root
        adjacency: Dict[int, List[int]] = {v: [] for v in nodes}
        count = 0
        for u, v in edges:
            adjacency[u].append(v)
            adjacency[v].append(u)
            count += 1
        if count != len(nodes) - 1:
            raise GraphValidationError(f"a spanning tree on {len(nodes)} nodes needs {len(nodes) - 1} edges")
        parent: Dict[int, Optional[int]] = {root: None}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w in adjacency[v]:
                if w not in parent:
                    parent[w] = v
                    queue.append(w)
        if len(parent) != len(nodes):
            raise GraphValidationError("edge list does not span the node set")
        return cls(root=root, parent=parent, node_weights={v: node_weights[v] for v in nodes})


def random_walk_tree(adjacency: Mapping[int, Sequence[int]], nodes: Sequence[int], rng: RandomSource,
                     node_weights: Mapping[int, int]) -> SpanningTree:
    """
    Алгоритм Уилсона: случайные блуждания со стиранием петель до текущего дерева.
    Петли стираются перезаписью указателя next при повторном посещении.
    """
    root = nodes[rng.randbelow(len(nodes))]
    in_tree = {root}
    next_node: Dict[int, Optional[int]] = {root: None}
    for start in nodes:
        u = start
        while u not in in_tree:
            neighbors = adjacency[u]
            w = neighbors[rng.randbelow(len(neighbors))]
            next_node[u] = w
            u = w
        u = start
        while u not in in_tree:
            in_tree.add(u)
            u = next_node[u]
    parent = {v: next_node[v] for v in nodes}
    return SpanningTree(root=root, parent=parent, node_weights=node_weights)


def wilson_ust(graph: DualGraph, node_subset: Iterable[int], rng: RandomSource) -> SpanningTree:
    """
    Равномерное остовное дерево индуцированного подграфа
    :raises DisconnectedRegionError: подграф несвязен
    """
    nodes = graph.require_connected_subset(node_subset)
    adjacency = graph.induced_adjacency(nodes)
    population = graph.population
    return random_walk_tree(adjacency, nodes, rng, {v: population[v] for v in nodes})


def find_district_cuts(tree: SpanningTree, target: float, epsilon: float,
                       complement_target: Optional[float] = None) -> List[TreeEdge]:
    """
    Ребра, отделяющие поддерево с весом в пределах (1 +- epsilon) * target.
    Если задан complement_target, оставшаяся часть тоже должна попасть в допуск.
    """
    weights = tree.subtree_weights()
    total = weights[tree.root]
    cuts = []
    for v in tree.traversal_order()[1:]:
        below = weights[v]
        if not within_tolerance(below, target, epsilon):
            continue
        if complement_target is not None and not within_tolerance(total - below, complement_target, epsilon):
            continue
        cuts.append((v, tree.parent[v]))
    return cuts


def find_balanced_cuts(tree: SpanningTree, total_ideal: float, epsilon: float) -> List[TreeEdge]:
    """
    Все ребра дерева, после удаления которых обе компоненты имеют вес
    в пределах (1 +- epsilon) * total_ideal. Первый элемент ребра - корень
    отрезаемого поддерева.
    """
    return find_district_cuts(tree, total_ideal, epsilon, complement_target=total_ideal)
