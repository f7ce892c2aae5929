import math
import logging
from typing import Iterable, List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from config import Config
from errors import DisconnectedRegionError
from graph.dual_graph import DualGraph
from graph.partition import Partition, is_contiguous
from services.cache_service import CacheService

# Настройка логгера
logger = logging.getLogger(__name__)


def laplacian_minor(graph: DualGraph, nodes: List[int]) -> sp.csc_matrix:
    """Лапласиан индуцированного подграфа без строки и столбца первого узла"""
    index = {v: i for i, v in enumerate(nodes)}
    rows, cols = [], []
    degree = np.zeros(len(nodes))
    for v in nodes:
        i = index[v]
        for w in graph.adjacency[v]:
            j = index.get(w)
            if j is not None:
                rows.append(i)
                cols.append(j)
                degree[i] += 1
    size = len(nodes)
    adjacency = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size))
    laplacian = sp.diags(degree) - adjacency
    return laplacian[1:, 1:].tocsc()


def _bareiss_determinant(matrix: List[List[int]]) -> int:
    """Определитель целочисленной матрицы без дробей (алгоритм Барейса)"""
    a = [row[:] for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    previous = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // previous
        previous = a[k][k]
    return sign * a[n - 1][n - 1]


def spanning_tree_count_exact(graph: DualGraph, node_subset: Optional[Iterable[int]] = None) -> int:
    """Точное число остовных деревьев индуцированного подграфа (0, если он несвязен)"""
    nodes = sorted(range(graph.node_count) if node_subset is None else set(node_subset))
    if len(nodes) <= 1:
        return 1
    minor = laplacian_minor(graph, nodes).toarray()
    return _bareiss_determinant([[int(round(x)) for x in row] for row in minor])


def log_spanning_tree_count(graph: DualGraph, node_subset: Optional[Iterable[int]] = None,
                            exact: bool = False) -> float:
    """
    Натуральный логарифм числа остовных деревьев по теореме Кирхгофа
    :param node_subset: Узлы подграфа (по умолчанию весь граф)
    :param exact: Целочисленный режим; для малых подграфов включается сам
    :raises DisconnectedRegionError: подграф несвязен
    """
    nodes = graph.require_connected_subset(range(graph.node_count) if node_subset is None else node_subset)
    size = len(nodes)
    if size <= 1:
        return 0.0
    if exact or size <= Config.EXACT_TREE_COUNT_LIMIT:
        return math.log(spanning_tree_count_exact(graph, nodes))

    minor = laplacian_minor(graph, nodes)
    if size - 1 <= Config.DENSE_LAPLACIAN_LIMIT:
        sign, logdet = np.linalg.slogdet(minor.toarray())
    else:
        # Минор положительно определен: |det| = det
        factor = splu(minor)
        diagonal = factor.U.diagonal()
        sign, logdet = 1.0, float(np.sum(np.log(np.abs(diagonal))))
    if sign <= 0:
        raise DisconnectedRegionError("Laplacian minor is singular")
    return float(logdet)


def log_partition_tree_score(graph: DualGraph, partition: Partition,
                             cache: Optional[CacheService] = None) -> float:
    """
    Сумма логарифмов числа деревьев округов; при k = 2 добавляется
    логарифм числа ребер между округами. При k > 2 межокружной член опущен.
    :raises DisconnectedRegionError: план несвязен
    """
    if not is_contiguous(graph, partition):
        raise DisconnectedRegionError("tree score requires a contiguous plan")
    score = 0.0
    for district in range(1, partition.k + 1):
        nodes = partition.district_nodes(district)
        if cache is None:
            score += log_spanning_tree_count(graph, nodes)
        else:
            key = CacheService.node_set_key("log_trees", nodes)
            score += cache.get(key, lambda: log_spanning_tree_count(graph, nodes))
    if partition.k == 2:
        score += math.log(partition.cut_edge_count)
    return score
