import math
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from graph.dual_graph import DualGraph
from graph.partition import (
    Partition,
    flip_preserves_contiguity,
    is_contiguous,
    within_tolerance,
)

# Настройка логгера
logger = logging.getLogger(__name__)

Predicate = Callable[[Partition], bool]


@dataclass(frozen=True)
class ConstraintSet:
    """
    Предикат допустимости C: конъюнкция всех включенных проверок.

    cut_edge_cap: целое - абсолютный предел |dP|; дробь в (0, 1) - доля от |E|.
    """

    pop_tolerance: Optional[float] = None
    cut_edge_cap: Optional[Union[int, float]] = None
    require_contiguity: bool = True
    predicates: Tuple[Tuple[str, Predicate], ...] = field(default_factory=tuple)

    def with_predicate(self, name: str, predicate: Predicate) -> "ConstraintSet":
        return ConstraintSet(
            pop_tolerance=self.pop_tolerance,
            cut_edge_cap=self.cut_edge_cap,
            require_contiguity=self.require_contiguity,
            predicates=self.predicates + ((name, predicate),),
        )

    def cut_cap_for(self, graph: DualGraph) -> Optional[int]:
        cap = self.cut_edge_cap
        if cap is None:
            return None
        if isinstance(cap, float) and 0 < cap < 1:
            return int(math.floor(cap * graph.edge_count))
        return int(cap)

    def population_ok(self, partition: Partition) -> bool:
        if self.pop_tolerance is None:
            return True
        ideal = partition.graph.total_population / partition.k
        return all(
            within_tolerance(partition.population_of(d), ideal, self.pop_tolerance)
            for d in range(1, partition.k + 1)
        )

    def _common_checks(self, graph: DualGraph, partition: Partition) -> bool:
        if partition.has_empty_district:
            return False
        if not self.population_ok(partition):
            return False
        cap = self.cut_cap_for(graph)
        if cap is not None and partition.cut_edge_count > cap:
            return False
        return True

    def _predicates_ok(self, partition: Partition) -> bool:
        for name, predicate in self.predicates:
            if not predicate(partition):
                logger.debug(f"Predicate '{name}' rejected the plan")
                return False
        return True

    def check_without_contiguity(self, graph: DualGraph, partition: Partition) -> bool:
        """Проверка для предложений, которые сохраняют связность сами (ReCom)"""
        return self._common_checks(graph, partition) and self._predicates_ok(partition)

    def check_flip(self, graph: DualGraph, partition: Partition, node: int, old_district: int) -> bool:
        """Проверка после переноса одного узла: связность проверяется локально"""
        if not self._common_checks(graph, partition):
            return False
        if self.require_contiguity and not flip_preserves_contiguity(graph, partition, node, old_district):
            return False
        return self._predicates_ok(partition)


def check(constraint_set: ConstraintSet, graph: DualGraph, partition: Partition) -> bool:
    """Полная проверка C(P)"""
    if not constraint_set._common_checks(graph, partition):
        return False
    if constraint_set.require_contiguity and not is_contiguous(graph, partition):
        return False
    return constraint_set._predicates_ok(partition)


def parse_cut_cap(value: Union[None, int, float, str]) -> Optional[Union[int, float]]:
    """'5%' или 0.05 -> доля от |E|; '120' или 120 -> абсолютный предел"""
    if value is None:
        return None
    if isinstance(value, str):
        text = value.strip()
        if text.endswith("%"):
            return float(text[:-1]) / 100.0
        value = float(text) if "." in text else int(text)
    if isinstance(value, float) and value.is_integer() and value >= 1:
        return int(value)
    return value


# ------------------------------
# Пороговые предикаты по атрибутам
# ------------------------------

def _district_shares(partition: Partition, numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    labels = np.asarray(partition.assignment)
    num = np.bincount(labels, weights=numerator, minlength=partition.k + 1)[1:]
    den = np.bincount(labels, weights=denominator, minlength=partition.k + 1)[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1), 0.0)


def max_share_predicate(graph: DualGraph, numerator: str, denominator: str, threshold: float) -> Predicate:
    """Ни в одном округе доля группы не превышает порог"""
    num, den = graph.column(numerator), graph.column(denominator)

    def predicate(partition: Partition) -> bool:
        return bool(np.all(_district_shares(partition, num, den) <= threshold + 1e-12))

    return predicate


def min_share_predicate(graph: DualGraph, numerator: str, denominator: str, threshold: float,
                        districts: int = 1) -> Predicate:
    """Как минимум `districts` округов имеют долю группы не ниже порога"""
    num, den = graph.column(numerator), graph.column(denominator)

    def predicate(partition: Partition) -> bool:
        return int(np.sum(_district_shares(partition, num, den) >= threshold - 1e-12)) >= districts

    return predicate


# ------------------------------
# Веса и отжиг
# ------------------------------

@dataclass(frozen=True)
class WeightSchedule:
    """
    Расписание beta(step); вес плана пропорционален x^|dP| при x = 2^(-beta).
    linear: beta0 до start_step, линейно до beta1 к end_step, затем beta1.
    """

    kind: str = "constant"
    beta0: float = 0.0
    beta1: float = 0.0
    start_step: int = 0
    end_step: int = 0

    def __post_init__(self):
        if self.kind not in ("constant", "linear"):
            raise ValueError(f"unknown schedule kind '{self.kind}'")
        if self.beta0 < 0 or self.beta1 < 0:
            raise ValueError("beta must be nonnegative")
        if self.kind == "linear" and self.end_step < self.start_step:
            raise ValueError("linear schedule requires end_step >= start_step")

    @classmethod
    def constant(cls, beta: float) -> "WeightSchedule":
        return cls(kind="constant", beta0=beta, beta1=beta)

    @classmethod
    def linear(cls, start_step: int, end_step: int, beta0: float, beta1: float) -> "WeightSchedule":
        return cls(kind="linear", beta0=beta0, beta1=beta1, start_step=start_step, end_step=end_step)

    @property
    def max_beta(self) -> float:
        return max(self.beta0, self.beta1)


def parse_schedule(text: Optional[str]) -> Optional[WeightSchedule]:
    """'lin:a,b,beta0,beta1' или 'const:beta'"""
    if not text:
        return None
    kind, _, body = text.partition(":")
    values = [v.strip() for v in body.split(",") if v.strip()]
    if kind in ("lin", "linear") and len(values) == 4:
        return WeightSchedule.linear(int(float(values[0])), int(float(values[1])),
                                     float(values[2]), float(values[3]))
    if kind in ("const", "constant") and len(values) == 1:
        return WeightSchedule.constant(float(values[0]))
    raise ValueError(f"cannot parse beta schedule '{text}'")


def anneal_beta(schedule: WeightSchedule, step: int) -> float:
    if step < 0:
        raise ValueError("step must be nonnegative")
    if schedule.kind == "constant" or step <= schedule.start_step:
        return schedule.beta0
    if step >= schedule.end_step:
        return schedule.beta1
    fraction = (step - schedule.start_step) / (schedule.end_step - schedule.start_step)
    return schedule.beta0 + fraction * (schedule.beta1 - schedule.beta0)


def _cut_count(value: Union[Partition, int]) -> int:
    return value.cut_edge_count if isinstance(value, Partition) else int(value)


def acceptance_probability(current: Union[Partition, int], proposed: Union[Partition, int], beta: float) -> float:
    """min(1, x^delta), x = 2^(-beta), delta = |dP'| - |dP|"""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    delta = _cut_count(proposed) - _cut_count(current)
    if beta == 0 or delta <= 0:
        return 1.0
    return 2.0 ** (-beta * delta)


def metropolis_accept(current: Union[Partition, int], proposed: Union[Partition, int], beta: float, rng) -> bool:
    probability = acceptance_probability(current, proposed, beta)
    if probability >= 1.0:
        return True
    return rng.random() < probability


# ------------------------------
# Обмен температур
# ------------------------------

def swap_probability(beta_i: float, beta_j: float, cut_i: int, cut_j: int) -> float:
    """min(1, 2^((beta_i - beta_j) * (|dP_i| - |dP_j|)))"""
    exponent = (beta_i - beta_j) * (cut_i - cut_j)
    if exponent >= 0:
        return 1.0
    return 2.0 ** exponent


def tempering_swap(replica_states: Sequence[Union[Partition, int]], replica_betas: Sequence[float],
                   swap_interval: int, rng, step: Optional[int] = None) -> List[float]:
    """
    Предлагает обмены температур между соседними по beta репликами
    :param replica_states: Разбиения реплик (или их |dP|)
    :param replica_betas: Текущие beta реплик
    :param swap_interval: Период барьера обмена
    :param step: Номер шага; если не кратен swap_interval - обмена нет
    :return: Новое распределение beta по репликам
    """
    if len(replica_states) != len(replica_betas) or len(replica_betas) < 2:
        raise ValueError("tempering requires at least two replicas with one beta each")
    betas = list(replica_betas)
    if step is not None and (swap_interval <= 0 or step % swap_interval):
        return betas

    cuts = [_cut_count(state) for state in replica_states]
    order = sorted(range(len(betas)), key=lambda i: (betas[i], i))
    for position in range(len(order) - 1):
        i, j = order[position], order[position + 1]
        probability = swap_probability(betas[i], betas[j], cuts[i], cuts[j])
        if probability >= 1.0 or rng.random() < probability:
            betas[i], betas[j] = betas[j], betas[i]
            # Реплика i поднимается на следующую ступень лестницы
            order[position], order[position + 1] = j, i
    return betas
