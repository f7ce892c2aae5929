import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from errors import GraphValidationError
from graph.dual_graph import DualGraph
from graph.partition import Partition

# Настройка логгера
logger = logging.getLogger(__name__)

PARTY_A = "votes_a"
PARTY_B = "votes_b"


def grid_graph(rows: int, cols: int, attributes: Optional[Dict[str, np.ndarray]] = None) -> DualGraph:
    """Решетка rows x cols с единичным населением; узел (r, c) имеет индекс r*cols + c"""
    edges: List[Tuple[int, int]] = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    row_index, col_index = np.divmod(np.arange(rows * cols), cols)
    columns = {"row": row_index, "col": col_index}
    columns.update(attributes or {})
    node_ids = [f"{r}-{c}" for r in range(rows) for c in range(cols)]
    return DualGraph(rows * cols, edges, [1] * (rows * cols), attributes=columns, node_ids=node_ids)


def parse_vote_pattern(pattern: str) -> Tuple[str, int]:
    """'rows:40' -> ('rows', 40); 'none' -> ('none', 0)"""
    if pattern in (None, "", "none"):
        return "none", 0
    kind, _, value = pattern.partition(":")
    if kind not in ("rows", "cols") or not value.isdigit():
        raise ValueError(f"unknown vote pattern '{pattern}' (expected rows:m, cols:m or none)")
    return kind, int(value)


def voting_grid(n: int, vote_pattern: str = "none") -> DualGraph:
    """
    Синтетическая решетка n x n с голосами по шаблону
    :param vote_pattern: rows:m - голоса партии A в верхних m строках, cols:m - в левых m столбцах
    """
    if n <= 0:
        raise GraphValidationError(f"grid side must be positive, got {n}")
    kind, extent = parse_vote_pattern(vote_pattern)
    rows, cols = np.divmod(np.arange(n * n), n)
    attributes: Dict[str, np.ndarray] = {}
    if kind != "none":
        votes_a = (rows < extent) if kind == "rows" else (cols < extent)
        attributes[PARTY_A] = votes_a.astype(float)
        attributes[PARTY_B] = 1.0 - attributes[PARTY_A]
    return grid_graph(n, n, attributes)


def stripe_plan(graph: DualGraph, n: int, k_stripes: int) -> Partition:
    """Вертикальные полосы равной ширины; k_stripes должно делить n"""
    if k_stripes <= 0 or n % k_stripes:
        raise GraphValidationError(f"grid side {n} is not divisible by {k_stripes} stripes")
    cols = np.arange(n * n) % n
    return Partition(graph, (cols // (n // k_stripes) + 1).tolist(), k_stripes)


def make_grid(n: int, k_stripes: int, vote_pattern: str = "none") -> Tuple[DualGraph, Partition]:
    """
    Решетка n x n с начальным планом из вертикальных полос
    :param n: Сторона решетки
    :param k_stripes: Число полос-округов (должно делить n)
    :return: (граф, разбиение на полосы)
    """
    graph = voting_grid(n, vote_pattern)
    partition = stripe_plan(graph, n, k_stripes)
    logger.info(f"Grid {n}x{n} built with {k_stripes} stripes, pattern={vote_pattern}")
    return graph, partition
