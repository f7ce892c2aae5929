import json
import logging
from typing import Dict, List, Optional

import pandas as pd

from errors import GraphValidationError
from graph.dual_graph import DualGraph
from graph.partition import Partition

# Настройка логгера
logger = logging.getLogger(__name__)


def load_graph_json(path: str) -> DualGraph:
    """
    Читает двойственный граф в формате
    {"nodes": [{"id", "pop", "attrs"}], "edges": [{"a", "b", "w"?}]}
    :param path: Путь к JSON-файлу
    :return: DualGraph с плотными индексами в порядке перечисления узлов
    """
    with open(path, "r", encoding="utf-8") as handle:
        document = json.load(handle)
    graph = graph_from_document(document)
    logger.info(f"Graph loaded from {path}: {graph.node_count} nodes, {graph.edge_count} edges")
    return graph


def graph_from_document(document: Dict) -> DualGraph:
    nodes = document.get("nodes") or []
    if not nodes:
        raise GraphValidationError("graph document has no nodes")

    node_ids = [str(node["id"]) for node in nodes]
    index = {name: i for i, name in enumerate(node_ids)}
    if len(index) != len(node_ids):
        raise GraphValidationError("node ids must be unique")

    population = [int(node.get("pop", 0)) for node in nodes]

    # Атрибуты: столбец должен присутствовать у каждого узла
    names = sorted({name for node in nodes for name in (node.get("attrs") or {})})
    attributes: Dict[str, List[float]] = {}
    for name in names:
        column = []
        for node in nodes:
            attrs = node.get("attrs") or {}
            if name not in attrs:
                raise GraphValidationError(f"node '{node['id']}' is missing attribute '{name}'")
            column.append(float(attrs[name]))
        attributes[name] = column

    edges = []
    weights = []
    for edge in document.get("edges") or []:
        try:
            a, b = index[str(edge["a"])], index[str(edge["b"])]
        except KeyError as e:
            raise GraphValidationError(f"edge references unknown node {e}") from None
        edges.append((a, b))
        weight = edge.get("w")
        weights.append(1.0 if weight is None else float(weight))

    return DualGraph(len(nodes), edges, population, attributes=attributes,
                     edge_weights=weights, node_ids=node_ids)


def dump_graph_json(graph: DualGraph, path: str) -> None:
    """Записывает граф в формате ввода"""
    columns = {name: graph.column(name) for name in graph.attribute_names}
    nodes = []
    for v, node_id in enumerate(graph.node_ids):
        nodes.append({
            "id": node_id,
            "pop": graph.population[v],
            "attrs": {name: float(values[v]) for name, values in columns.items()},
        })
    edges = [
        {"a": graph.node_ids[u], "b": graph.node_ids[v], "w": w}
        for (u, v), w in zip(graph.edges, graph.edge_weights)
    ]
    with open(path, "w", encoding="utf-8") as handle:
        json.dump({"nodes": nodes, "edges": edges}, handle)
    logger.info(f"Graph written to {path}")


def read_assignment_csv(path: str, graph: DualGraph, k: Optional[int] = None) -> Partition:
    """Читает назначение 'node_id,district' - ровно одна строка на узел"""
    frame = pd.read_csv(path, dtype={"node_id": str})
    if list(frame.columns[:2]) != ["node_id", "district"]:
        raise GraphValidationError("assignment CSV must have header node_id,district")
    if frame["node_id"].duplicated().any():
        raise GraphValidationError("assignment CSV lists a node more than once")
    if len(frame) != graph.node_count:
        raise GraphValidationError(
            f"assignment CSV has {len(frame)} rows for a graph of {graph.node_count} nodes"
        )
    assignment = [0] * graph.node_count
    for node_id, district in zip(frame["node_id"], frame["district"]):
        assignment[graph.index_of(node_id)] = int(district)
    logger.info(f"Assignment loaded from {path}")
    return Partition(graph, assignment, k)


def write_assignment_csv(partition: Partition, path: str) -> None:
    frame = pd.DataFrame({
        "node_id": list(partition.graph.node_ids),
        "district": list(partition.assignment),
    })
    frame.to_csv(path, index=False)
    logger.info(f"Assignment written to {path}")
