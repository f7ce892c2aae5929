import json
import logging
import operator
import re
from typing import Any, Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, TextIO, Tuple, TypedDict, Union

import numpy as np
import pandas as pd

from functions.oracle import total_variation
from functions.statistics import percentile_rank

# Настройка логгера
logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class EnsembleRecord(TypedDict, total=False):
    step: int
    stats: Dict[str, Any]
    assignment: List[int]


RecordPredicate = Callable[[EnsembleRecord], bool]


class EnsembleWriter:
    """
    Потоковая запись ансамбля в JSON Lines: первая строка - заголовок
    с конфигурацией и генератором, далее одна запись на строку
    """

    def __init__(self, handle: TextIO, header: Mapping[str, Any]):
        self.handle = handle
        self.records = 0
        self._keys: Optional[Tuple[str, ...]] = None
        self._write({"header": {"format_version": FORMAT_VERSION, **header}})

    def _write(self, document: Mapping[str, Any]) -> None:
        self.handle.write(json.dumps(document, sort_keys=True, separators=(",", ":")))
        self.handle.write("\n")

    def write(self, record: EnsembleRecord) -> None:
        keys = tuple(record["stats"])
        if self._keys is None:
            self._keys = keys
        elif keys != self._keys:
            raise ValueError(f"statistic keys changed mid-run: {keys} != {self._keys}")
        self._write(record)
        self.records += 1


def read_ensemble(path: str) -> Tuple[Dict[str, Any], List[EnsembleRecord]]:
    """Читает заголовок и записи ансамбля"""
    header: Dict[str, Any] = {}
    records: List[EnsembleRecord] = []
    with open(path, "r", encoding="utf-8") as handle:
        for number, line in enumerate(handle):
            if not line.strip():
                continue
            document = json.loads(line)
            if number == 0 and "header" in document:
                header = document["header"]
            else:
                records.append(document)
    logger.info(f"Ensemble loaded from {path}: {len(records)} records")
    return header, records


def ensemble_frame(records: Iterable[EnsembleRecord]) -> pd.DataFrame:
    """Таблица: шаг и скалярные статистики (векторные остаются списками)"""
    rows = [{"step": record["step"], **record["stats"]} for record in records]
    return pd.DataFrame(rows)


# ------------------------------
# Отсев
# ------------------------------

_COMPARISONS = {
    "<=": operator.le,
    ">=": operator.ge,
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    ">": operator.gt,
}
_PREDICATE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(<=|>=|==|!=|<|>)\s*(-?[0-9.eE+-]+)\s*$")


def parse_predicate(text: str) -> RecordPredicate:
    """'max_share<=0.6' -> предикат над статистиками записи"""
    match = _PREDICATE.match(text)
    if not match:
        raise ValueError(f"cannot parse predicate '{text}' (expected name<op>number)")
    name, symbol, value = match.group(1), match.group(2), float(match.group(3))
    compare = _COMPARISONS[symbol]

    def predicate(record: EnsembleRecord) -> bool:
        if name not in record["stats"]:
            raise KeyError(f"statistic '{name}' is not in the ensemble")
        return bool(compare(record["stats"][name], value))

    return predicate


def winnow(ensemble: Iterable[EnsembleRecord], predicate: RecordPredicate) -> List[EnsembleRecord]:
    """Подпоследовательность записей, удовлетворяющих предикату, в исходном порядке"""
    return [record for record in ensemble if predicate(record)]


# ------------------------------
# Сводки
# ------------------------------

def histogram(records: Sequence[EnsembleRecord], statistic: str) -> pd.DataFrame:
    """Гистограмма скалярной статистики: value, count, fraction"""
    values = pd.Series([record["stats"][statistic] for record in records], name="value")
    counts = values.value_counts().sort_index()
    frame = counts.rename("count").reset_index()
    frame.columns = ["value", "count"]
    frame["fraction"] = frame["count"] / max(1, len(values))
    return frame


def shares_frame(records: Sequence[EnsembleRecord], statistic: str = "shares") -> pd.DataFrame:
    """Векторы долей по записям: столбцы district_1..district_k (по возрастанию доли)"""
    rows = [record["stats"][statistic] for record in records]
    if not rows:
        return pd.DataFrame()
    columns = [f"district_{i}" for i in range(1, len(rows[0]) + 1)]
    frame = pd.DataFrame(rows, columns=columns)
    frame.insert(0, "step", [record["step"] for record in records])
    return frame


def summarize(records: Sequence[EnsembleRecord], out_prefix: str) -> List[str]:
    """
    Пишет CSV для построения графиков: гистограмму каждой скалярной статистики
    и векторы долей
    :return: Пути записанных файлов
    """
    written = []
    if not records:
        logger.warning("Ensemble is empty, nothing to summarize")
        return written
    for name, value in records[0]["stats"].items():
        if isinstance(value, list):
            path = f"{out_prefix}_{name}.csv"
            shares_frame(records, name).to_csv(path, index=False)
        else:
            path = f"{out_prefix}_{name}_hist.csv"
            histogram(records, name).to_csv(path, index=False)
        written.append(path)
        logger.info(f"Summary written to {path}")
    return written


def outlier_report(frame: pd.DataFrame, reference_stats: Mapping[str, float]) -> pd.DataFrame:
    """
    Положение опорного плана в ансамбле по каждой статистике
    :return: statistic, reference, below, equal, above, percentile
    """
    rows = []
    for name, reference in reference_stats.items():
        if name not in frame.columns:
            raise KeyError(f"statistic '{name}' is not in the ensemble")
        values = frame[name].to_numpy(dtype=float)
        rows.append({
            "statistic": name,
            "reference": reference,
            "below": float(np.mean(values < reference)),
            "equal": float(np.mean(values == reference)),
            "above": float(np.mean(values > reference)),
            "percentile": percentile_rank(values, reference),
        })
    return pd.DataFrame(rows)


def compare_ensembles(first: Sequence[EnsembleRecord], second: Sequence[EnsembleRecord], statistic: str) -> float:
    """Расстояние полной вариации между гистограммами статистики двух ансамблей"""
    a = histogram(first, statistic)
    b = histogram(second, statistic)
    return total_variation(dict(zip(a["value"], a["fraction"])), dict(zip(b["value"], b["fraction"])))
