import logging
from collections import deque
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from errors import DisconnectedRegionError, GraphValidationError

# Настройка логгера
logger = logging.getLogger(__name__)

POPULATION = "population"


class DualGraph:
    """
    Неизменяемый двойственный граф: узел на каждую географическую единицу,
    ребро между соседними единицами.

    Узлы - плотные целые 0..n-1; внешние строковые id хранятся в node_ids.
    Веса ребер (длина общей границы) по умолчанию равны 1.
    """

    __slots__ = (
        "_node_count", "_edges", "_edge_weights", "_edge_index", "_adjacency",
        "_incident", "_population", "_total_population", "_attributes", "_node_ids",
        "_id_index",
    )

    def __init__(
        self,
        node_count: int,
        edges: Iterable[Tuple[int, int]],
        population: Sequence[int],
        attributes: Optional[Mapping[str, Sequence[float]]] = None,
        edge_weights: Optional[Sequence[float]] = None,
        node_ids: Optional[Sequence[str]] = None,
        require_connected: bool = True,
    ):
        if node_count <= 0:
            raise GraphValidationError("graph must have at least one node")
        self._node_count = node_count

        # Ребра: нормализованные пары (u < v) без петель и дубликатов
        normalized: List[Tuple[int, int]] = []
        edge_index: Dict[Tuple[int, int], int] = {}
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphValidationError(f"self-loop at node {u}")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise GraphValidationError(f"edge ({u}, {v}) references an unknown node")
            key = (u, v) if u < v else (v, u)
            if key in edge_index:
                raise GraphValidationError(f"duplicate edge {key}")
            edge_index[key] = len(normalized)
            normalized.append(key)
        self._edges = tuple(normalized)
        self._edge_index = edge_index

        if edge_weights is None:
            weights = (1.0,) * len(normalized)
        else:
            weights = tuple(float(w) for w in edge_weights)
            if len(weights) != len(normalized):
                raise GraphValidationError("edge_weights must have one entry per edge")
            if any(w < 0 for w in weights):
                raise GraphValidationError("edge weights must be nonnegative")
        self._edge_weights = weights

        adjacency: List[List[int]] = [[] for _ in range(node_count)]
        incident: List[List[int]] = [[] for _ in range(node_count)]
        for eid, (u, v) in enumerate(normalized):
            adjacency[u].append(v)
            adjacency[v].append(u)
            incident[u].append(eid)
            incident[v].append(eid)
        self._adjacency = tuple(tuple(nbrs) for nbrs in adjacency)
        self._incident = tuple(tuple(eids) for eids in incident)

        if len(population) != node_count:
            raise GraphValidationError("population must have one entry per node")
        pops = tuple(int(p) for p in population)
        if any(p < 0 for p in pops):
            raise GraphValidationError("population must be nonnegative")
        self._population = pops
        self._total_population = sum(pops)

        columns: Dict[str, np.ndarray] = {}
        for name, values in (attributes or {}).items():
            column = np.asarray(values, dtype=float)
            if column.shape != (node_count,):
                raise GraphValidationError(f"attribute '{name}' must have exactly {node_count} entries")
            column.setflags(write=False)
            columns[name] = column
        self._attributes = columns

        if node_ids is None:
            node_ids = [str(i) for i in range(node_count)]
        if len(node_ids) != node_count or len(set(node_ids)) != node_count:
            raise GraphValidationError("node_ids must be unique and cover every node")
        self._node_ids = tuple(str(i) for i in node_ids)
        self._id_index = {name: i for i, name in enumerate(self._node_ids)}

        if require_connected and not self.is_connected_subset(range(node_count)):
            raise GraphValidationError("dual graph must be connected")

        logger.debug(f"DualGraph built: {node_count} nodes, {len(normalized)} edges")

    # ------------------------------
    # Базовые свойства
    # ------------------------------

    @property
    def node_count(self) -> int:
        return self._node_count

    @property
    def edges(self) -> Tuple[Tuple[int, int], ...]:
        return self._edges

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @property
    def edge_weights(self) -> Tuple[float, ...]:
        return self._edge_weights

    @property
    def adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        return self._adjacency

    @property
    def incident_edges(self) -> Tuple[Tuple[int, ...], ...]:
        return self._incident

    @property
    def population(self) -> Tuple[int, ...]:
        return self._population

    @property
    def total_population(self) -> int:
        return self._total_population

    @property
    def node_ids(self) -> Tuple[str, ...]:
        return self._node_ids

    @property
    def attribute_names(self) -> List[str]:
        return list(self._attributes)

    def neighbors(self, node: int) -> Tuple[int, ...]:
        return self._adjacency[node]

    def degree(self, node: int) -> int:
        return len(self._adjacency[node])

    def edge_id(self, u: int, v: int) -> int:
        return self._edge_index[(u, v) if u < v else (v, u)]

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._edge_index

    def index_of(self, node_id: str) -> int:
        """Плотный индекс по внешнему id"""
        try:
            return self._id_index[str(node_id)]
        except KeyError:
            raise GraphValidationError(f"unknown node id '{node_id}'") from None

    def column(self, name: str) -> np.ndarray:
        """Столбец атрибутов; имя 'population' дает население узлов"""
        if name == POPULATION and name not in self._attributes:
            return np.asarray(self._population, dtype=float)
        try:
            return self._attributes[name]
        except KeyError:
            raise GraphValidationError(f"unknown attribute column '{name}'") from None

    # ------------------------------
    # Индуцированные подграфы
    # ------------------------------

    def induced_adjacency(self, nodes: Iterable[int]) -> Dict[int, List[int]]:
        """Списки смежности подграфа, индуцированного множеством узлов"""
        members = set(nodes)
        adjacency = self._adjacency
        return {v: [w for w in adjacency[v] if w in members] for v in members}

    def is_connected_subset(self, nodes: Iterable[int]) -> bool:
        """Проверка связности индуцированного подграфа обходом в ширину"""
        members = set(nodes)
        if not members:
            return True
        start = next(iter(members))
        seen = {start}
        queue = deque([start])
        adjacency = self._adjacency
        while queue:
            v = queue.popleft()
            for w in adjacency[v]:
                if w in members and w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(members)

    def require_connected_subset(self, nodes: Iterable[int]) -> List[int]:
        members = sorted(set(nodes))
        if not self.is_connected_subset(members):
            raise DisconnectedRegionError(f"induced subgraph on {len(members)} nodes is disconnected")
        return members

    def to_networkx(self) -> nx.Graph:
        """Копия графа в networkx для сверок и внешних инструментов"""
        g = nx.Graph()
        for v in range(self._node_count):
            g.add_node(v, population=self._population[v], node_id=self._node_ids[v])
        for (u, v), w in zip(self._edges, self._edge_weights):
            g.add_edge(u, v, weight=w)
        return g

    def __repr__(self) -> str:
        return f"DualGraph(nodes={self._node_count}, edges={len(self._edges)})"
