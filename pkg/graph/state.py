from typing import Optional, TypedDict

from graph.partition import Partition


class ChainState(TypedDict):
    # Текущее состояние цепи
    partition: Partition
    replica: int

    # Учет шагов
    step: int  # число возвращенных состояний (для быстрого варианта - с учетом ожиданий)
    wait: int  # сколько шагов засчитано последнему состоянию
    accepted: bool

    # Веса
    beta: float
    proposals: int
    rejections: int

    # Ошибки
    error: Optional[str]


def new_chain_state(partition: Partition, replica: int = 0, beta: float = 0.0) -> ChainState:
    return ChainState(
        partition=partition,
        replica=replica,
        step=0,
        wait=1,
        accepted=True,
        beta=beta,
        proposals=0,
        rejections=0,
        error=None,
    )
