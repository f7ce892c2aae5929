import logging
from typing import List, Optional, Protocol, Sequence

import numpy as np

from chains.flip import FlipProposalOutcome
from functions.constraints import metropolis_accept, tempering_swap
from graph.partition import Partition
from graph.state import ChainState, new_chain_state
from services.monitoring import MonitoringService
from services.rng import RandomSource

# Настройка логгера
logger = logging.getLogger(__name__)

DEFAULT_LADDER_TOP = 3.0


class Proposal(Protocol):
    def propose(self, partition: Partition, rng: RandomSource) -> FlipProposalOutcome:
        ...


def advance(state: ChainState, proposal: Proposal, rng: RandomSource, beta: float = 0.0,
            monitor: Optional[MonitoringService] = None) -> ChainState:
    """
    Один переход цепи: предложение, затем фильтр Метрополиса с x = 2^(-beta).
    Отклоненный шаг откатывается и повторяет текущее состояние.
    :return: Обновленное состояние (тот же словарь)
    """
    partition = state["partition"]
    before = partition.cut_edge_count
    outcome = proposal.propose(partition, rng)
    state["proposals"] += 1
    moved = outcome.accepted

    if moved and beta > 0 and not metropolis_accept(before, partition.cut_edge_count, beta, rng):
        partition.undo()
        moved = False
        state["rejections"] += 1
        if monitor is not None:
            monitor.increment("metropolis", "rejections")

    state["step"] += outcome.wait
    state["wait"] = outcome.wait
    state["accepted"] = moved
    state["beta"] = beta
    return state


def default_ladder(replicas: int, beta_max: float = DEFAULT_LADDER_TOP) -> List[float]:
    """Равномерная лестница beta от 0 до beta_max"""
    if replicas < 1:
        raise ValueError("replicas must be positive")
    if replicas == 1:
        return [beta_max]
    return np.linspace(0.0, beta_max, replicas).tolist()


class ParallelTempering:
    """
    Реплики с разными beta продвигаются по очереди в одном потоке;
    каждые swap_interval шагов соседние по температуре реплики
    пробуют обменяться beta.
    """

    def __init__(self, proposal: Proposal, partitions: Sequence[Partition], betas: Sequence[float],
                 swap_interval: int, rng: RandomSource, monitor: Optional[MonitoringService] = None):
        if len(partitions) != len(betas) or len(betas) < 2:
            raise ValueError("tempering requires at least two replicas with one beta each")
        if swap_interval < 1:
            raise ValueError("swap_interval must be positive")
        self.proposal = proposal
        self.swap_interval = swap_interval
        self.monitor = monitor
        self.logger = logging.getLogger("parallel_tempering")

        streams = rng.spawn(len(partitions) + 1)
        self.replica_rngs = streams[:-1]
        self.swap_rng = streams[-1]
        self.states: List[ChainState] = [
            new_chain_state(partition, replica=i, beta=beta)
            for i, (partition, beta) in enumerate(zip(partitions, betas))
        ]
        self.betas = list(betas)
        self.steps = 0
        self.swaps = 0

    def step(self) -> ChainState:
        """Продвигает все реплики на один шаг и возвращает самую холодную"""
        for state, rng, beta in zip(self.states, self.replica_rngs, self.betas):
            advance(state, self.proposal, rng, beta, self.monitor)
        self.steps += 1

        if self.steps % self.swap_interval == 0:
            before = list(self.betas)
            self.betas = tempering_swap(
                [state["partition"] for state in self.states], self.betas, self.swap_interval, self.swap_rng
            )
            exchanged = sum(1 for old, new in zip(before, self.betas) if old != new) // 2
            self.swaps += exchanged
            for state, beta in zip(self.states, self.betas):
                state["beta"] = beta
            if self.monitor is not None:
                self.monitor.increment("tempering", "swaps_accepted", exchanged)
            self.logger.debug(f"Swap barrier at step {self.steps}: betas={self.betas}")
        return self.coldest()

    def coldest(self) -> ChainState:
        """Реплика с наибольшим beta (при равенстве - с меньшим номером)"""
        index = max(range(len(self.betas)), key=lambda i: (self.betas[i], -i))
        return self.states[index]
