import math
import logging
from typing import List, MutableSequence, Optional, Sequence, TypeVar

import numpy as np

from config import Config

T = TypeVar("T")

# Настройка логгера
logger = logging.getLogger(__name__)


class RandomSource:
    """
    Детерминированный поток случайных чисел для всех стохастических выборов.

    Основан на numpy PCG64, засеянном через SeedSequence; дочерние потоки
    получаются через SeedSequence.spawn и статистически независимы.
    Скалярные выборы обслуживаются из буфера равномерных величин.
    """

    GENERATOR_NAME = "numpy.random.PCG64 via SeedSequence (spawn for child streams)"

    def __init__(self, seed: Optional[int] = None, seed_sequence: Optional[np.random.SeedSequence] = None,
                 buffer_size: Optional[int] = None):
        if seed_sequence is None:
            seed_sequence = np.random.SeedSequence(Config.DEFAULT_RNG_SEED if seed is None else seed)
        self._seed_sequence = seed_sequence
        self._generator = np.random.Generator(np.random.PCG64(seed_sequence))
        self._buffer_size = buffer_size or Config.RNG_BUFFER_SIZE
        self._buffer: List[float] = []
        self._position = 0

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def describe(self) -> dict:
        """Описание генератора для заголовка ансамбля"""
        return {
            "generator": self.GENERATOR_NAME,
            "entropy": int(self._seed_sequence.entropy),
            "spawn_key": list(self._seed_sequence.spawn_key),
        }

    def spawn(self, count: int) -> List["RandomSource"]:
        """Создает count независимых дочерних потоков"""
        children = self._seed_sequence.spawn(count)
        return [RandomSource(seed_sequence=child, buffer_size=self._buffer_size) for child in children]

    def random(self) -> float:
        """Равномерная величина из [0, 1)"""
        if self._position >= len(self._buffer):
            self._buffer = self._generator.random(self._buffer_size).tolist()
            self._position = 0
        value = self._buffer[self._position]
        self._position += 1
        return value

    def randbelow(self, n: int) -> int:
        """Равномерное целое из {0, ..., n-1}"""
        if n <= 0:
            raise ValueError("randbelow requires n > 0")
        index = int(self.random() * n)
        # Округление вверх при u близком к 1
        return index if index < n else n - 1

    def bernoulli(self, probability: float) -> bool:
        return self.random() < probability

    def shuffle(self, items: MutableSequence[T]) -> None:
        """Перемешивание Фишера-Йетса на месте"""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def weighted_index(self, weights: Sequence[float]) -> int:
        """Индекс, выбранный пропорционально неотрицательным весам"""
        cumulative = np.cumsum(np.asarray(weights, dtype=float))
        total = cumulative[-1]
        if total <= 0:
            raise ValueError("weights must have a positive sum")
        index = int(np.searchsorted(cumulative, self.random() * total, side="right"))
        return min(index, len(cumulative) - 1)

    def geometric(self, stay_probability: float) -> int:
        """
        Число испытаний до первого выхода включительно
        :param stay_probability: Вероятность остаться (петли) на одном испытании
        :return: Целое >= 1 со средним 1/(1 - stay_probability)
        """
        if not 0 <= stay_probability < 1:
            raise ValueError("stay_probability must lie in [0, 1)")
        if stay_probability == 0:
            return 1
        u = 1.0 - self.random()  # (0, 1]
        return 1 + int(math.floor(math.log(u) / math.log(stay_probability)))
