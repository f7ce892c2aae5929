import logging
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np
from scipy import stats as scipy_stats

from chains.flip import uniform_flip_fast_step, uniform_flip_step
from chains.recom import RecomConfig, recom_step
from chains.spanning_tree import wilson_ust
from functions.constraints import ConstraintSet
from functions.oracle import (
    empirical_distribution,
    enumerate_partitions,
    enumerate_spanning_trees,
    flip_matrix,
    pair_counts,
    proposal_matrix,
    total_variation,
    tree_cut_distribution,
    uniform_flip_m,
    wait_weighted_occupancy,
)
from graph.grid import grid_graph, make_grid
from graph.partition import Partition
from services.rng import RandomSource


# Допуск 1/8 на решетке 4x4: округа по 7..9 узлов, иначе Flip не имеет ходов
FLIP_TOLERANCE = 0.125


@dataclass(frozen=True)
class VerificationResult:
    name: str
    value: float
    threshold: float
    higher_is_better: bool = False  # для p-значений

    @property
    def passed(self) -> bool:
        if self.higher_is_better:
            return self.value > self.threshold
        return self.value < self.threshold


class VerificationSuite:
    """Сверка цепей с точными распределениями оракула на малых графах"""

    def __init__(self, rng_seed: int = 0, flip_steps: int = 1_000_000, recom_draws: int = 100_000,
                 tree_draws: int = 100_000):
        self.rng = RandomSource(rng_seed)
        self.flip_steps = flip_steps
        self.recom_draws = recom_draws
        self.tree_draws = tree_draws
        self.logger = logging.getLogger("verification")

    def uniform_flip_stationary(self) -> VerificationResult:
        graph, _ = make_grid(4, 2)
        space = enumerate_partitions(graph, 2, ConstraintSet(pop_tolerance=FLIP_TOLERANCE))
        pi = flip_matrix(graph, space, variant="uniform").stationary()
        return VerificationResult("uniform-flip exact stationary vs uniform",
                                  float(np.abs(pi - 1.0 / len(space)).max()), 1e-10)

    def fast_flip_exact(self) -> VerificationResult:
        """Точная доля шагов ускоренного варианта при мере скачков, пропорциональной числу пар"""
        graph, _ = make_grid(4, 2)
        space = enumerate_partitions(graph, 2, ConstraintSet(pop_tolerance=FLIP_TOLERANCE))
        jump = pair_counts(space)
        jump /= jump.sum()
        residual = float(np.abs(jump @ proposal_matrix(space).matrix - jump).max())
        occupancy = wait_weighted_occupancy(space, jump)
        value = max(residual, total_variation(occupancy, np.full(len(space), 1.0 / len(space))))
        return VerificationResult("uniform-flip-fast exact wait-weighted occupancy vs uniform", value, 1e-10)

    def flip_occupancy(self, step_function: Callable, weighted: bool, m: float, rng: RandomSource) -> Dict:
        """Доли шагов по состояниям; ожидание засчитывается состоянию до шага"""
        graph, partition = make_grid(4, 2)
        constraint = ConstraintSet(pop_tolerance=FLIP_TOLERANCE)
        counts: Dict = {}
        steps = 0
        while steps < self.flip_steps:
            key = partition.canonical()
            outcome = step_function(graph, partition, constraint, m, rng)
            weight = outcome.wait if weighted else 1
            counts[key] = counts.get(key, 0) + weight
            steps += weight
        return empirical_distribution(list(counts), list(counts.values()))

    def uniform_flip_empirical(self) -> List[VerificationResult]:
        graph, _ = make_grid(4, 2)
        space = enumerate_partitions(graph, 2, ConstraintSet(pop_tolerance=FLIP_TOLERANCE))
        uniform = {state: 1.0 / len(space) for state in space.states}
        m = uniform_flip_m(space)
        first, second = self.rng.spawn(2)
        plain = self.flip_occupancy(uniform_flip_step, False, m, first)
        fast = self.flip_occupancy(uniform_flip_fast_step, True, m, second)
        return [
            VerificationResult("uniform-flip empirical vs uniform", total_variation(plain, uniform), 0.05),
            VerificationResult("uniform-flip-fast weighted vs uniform-flip", total_variation(fast, plain), 0.05),
        ]

    def recom_step_distribution(self) -> VerificationResult:
        graph = grid_graph(2, 3)
        exact = tree_cut_distribution(graph, 0.0)
        partition = Partition(graph, [1, 1, 2, 1, 2, 2], 2)
        config = RecomConfig(epsilon=0.0)
        rng = self.rng.spawn(1)[0]
        samples = []
        for _ in range(self.recom_draws):
            recom_step(graph, partition, config, rng)
            samples.append(partition.assignment)
        return VerificationResult("recom step vs tree-cut oracle", total_variation(empirical_distribution(samples), exact), 0.02)

    def wilson_uniformity(self) -> VerificationResult:
        graph = grid_graph(3, 3)
        trees = enumerate_spanning_trees(graph)
        rng = self.rng.spawn(1)[0]
        counts: Dict = {}
        for _ in range(self.tree_draws):
            key = frozenset(tuple(sorted(edge)) for edge in wilson_ust(graph, range(9), rng).edges)
            counts[key] = counts.get(key, 0) + 1
        observed = [counts.get(tree, 0) for tree in trees]
        if sum(observed) != self.tree_draws:
            raise AssertionError("Wilson sampler produced a tree outside the enumeration")
        p_value = float(scipy_stats.chisquare(observed).pvalue)
        return VerificationResult("wilson trees on 3x3 grid chi-square p-value", p_value, 0.01, higher_is_better=True)

    def run(self) -> List[VerificationResult]:
        results = [self.uniform_flip_stationary(), self.fast_flip_exact()]
        results.extend(self.uniform_flip_empirical())
        results.append(self.recom_step_distribution())
        results.append(self.wilson_uniformity())
        for result in results:
            status = "ok" if result.passed else "FAILED"
            self.logger.info(f"{result.name}: value={result.value:.4g} threshold={result.threshold} [{status}]")
        return results
