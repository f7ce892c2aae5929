import os
import json
import logging
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

logger = logging.getLogger(__name__)


class Config:
    # Логирование
    LOG_LEVEL = os.getenv("ENSEMBLE_LOG_LEVEL", "INFO")
    PROGRESS_EVERY = int(os.getenv("ENSEMBLE_PROGRESS_EVERY", 10000))

    # Генератор случайных чисел
    DEFAULT_RNG_SEED = int(os.getenv("ENSEMBLE_RNG_SEED", 0))
    RNG_BUFFER_SIZE = int(os.getenv("ENSEMBLE_RNG_BUFFER_SIZE", 8192))

    # Цепи
    FLIP_RETRY_FACTOR = int(os.getenv("ENSEMBLE_FLIP_RETRY_FACTOR", 10))
    MAX_TREE_REDRAWS = int(os.getenv("ENSEMBLE_MAX_TREE_REDRAWS", 1000))
    SEED_MAX_ATTEMPTS = int(os.getenv("ENSEMBLE_SEED_MAX_ATTEMPTS", 100))
    FLOOD_FILL_MAX_RESTARTS = int(os.getenv("ENSEMBLE_FLOOD_FILL_MAX_RESTARTS", 10000))

    # Вывод ансамбля
    ASSIGNMENT_EVERY = int(os.getenv("ENSEMBLE_ASSIGNMENT_EVERY", 100))

    # Оракул и подсчет деревьев
    ORACLE_MAX_LABELINGS = int(os.getenv("ENSEMBLE_ORACLE_MAX_LABELINGS", 5_000_000))
    ORACLE_MAX_TREE_NODES = int(os.getenv("ENSEMBLE_ORACLE_MAX_TREE_NODES", 12))
    EXACT_TREE_COUNT_LIMIT = int(os.getenv("ENSEMBLE_EXACT_TREE_COUNT_LIMIT", 20))
    DENSE_LAPLACIAN_LIMIT = int(os.getenv("ENSEMBLE_DENSE_LAPLACIAN_LIMIT", 3000))

    # Кеш и мониторинг
    CACHE_MAX_ENTRIES = int(os.getenv("ENSEMBLE_CACHE_MAX_ENTRIES", 4096))
    METRIC_HISTORY = int(os.getenv("ENSEMBLE_METRIC_HISTORY", 100))


ChainName = Literal["flip", "uniform-flip", "uniform-flip-fast", "recom", "recom-general"]
SeedMethod = Literal["file", "recursive-tree", "flood-fill", "stripes"]
PairWeighting = Literal["cut-edge", "district-pair", "boundary-length"]


class ElectionConfig(BaseModel):
    name: str = "election"
    party_a: str = "votes_a"
    party_b: Optional[str] = "votes_b"
    total: Optional[str] = None


class RunConfig(BaseModel):
    """Параметры одного прогона цепи (плоский документ ключ-значение)"""

    # Источник графа
    graph: Optional[str] = None
    grid: Optional[int] = None
    grid_districts: Optional[int] = None
    pattern: str = "none"

    # Начальный план
    seed_method: SeedMethod = "stripes"
    assignment: Optional[str] = None
    districts: Optional[int] = None

    # Цепь
    chain: ChainName = "recom"
    merge_count: int = Field(default=2, ge=2)
    steps: int = Field(default=1000, ge=1)
    burn_in: int = Field(default=0, ge=0)
    interval: int = Field(default=1, ge=1)
    flip_m: Optional[float] = None
    pair_weighting: PairWeighting = "cut-edge"
    max_tree_redraws: int = Field(default_factory=lambda: Config.MAX_TREE_REDRAWS, ge=1)

    # Ограничения
    pop_tolerance: Optional[float] = 0.02
    cut_edge_cap: Optional[Union[int, float, str]] = None
    require_contiguity: bool = True
    max_share: Optional[float] = None

    # Веса, отжиг, параллельный темперинг
    beta_schedule: Optional[str] = None
    replicas: int = Field(default=1, ge=1)
    swap_interval: int = Field(default=100, ge=1)
    replica_betas: Optional[List[float]] = None

    # Статистики и вывод
    stats: List[str] = Field(default_factory=lambda: ["cut_edges", "population_deviation"])
    election: Optional[ElectionConfig] = None
    unit_column: Optional[str] = None
    share_numerator: Optional[str] = None
    share_denominator: Optional[str] = None
    rng_seed: int = Field(default_factory=lambda: Config.DEFAULT_RNG_SEED)
    out: Optional[str] = None
    assignment_every: int = Field(default_factory=lambda: Config.ASSIGNMENT_EVERY, ge=1)
    validate_steps: bool = False

    @field_validator("pop_tolerance")
    @classmethod
    def _check_tolerance(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not 0 <= value < 1:
            raise ValueError("pop_tolerance must lie in [0, 1)")
        return value

    @field_validator("stats", mode="before")
    @classmethod
    def _split_stats(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [name.strip() for name in value.split(",") if name.strip()]
        return value

    @model_validator(mode="after")
    def _check_run(self) -> "RunConfig":
        if self.steps <= self.burn_in:
            raise ValueError("steps must exceed burn_in")
        if self.graph is None and self.grid is None:
            raise ValueError("either graph or grid must be given")
        if self.seed_method == "file" and not self.assignment:
            raise ValueError("seed_method 'file' requires an assignment path")
        if self.seed_method == "stripes" and self.grid is None:
            raise ValueError("seed_method 'stripes' is only available for synthetic grids")
        if self.chain in ("recom", "recom-general") and self.pop_tolerance is None:
            raise ValueError("ReCom chains require pop_tolerance")
        if self.replica_betas is not None and len(self.replica_betas) != self.replicas:
            raise ValueError("replica_betas must have one entry per replica")
        if self.replicas > 1 and self.chain == "uniform-flip-fast":
            raise ValueError("tempering replicas do not support uniform-flip-fast waits")
        return self

    @property
    def district_count(self) -> int:
        """Число округов: явное значение или число полос синтетической решетки"""
        if self.districts is not None:
            return self.districts
        if self.grid_districts is not None:
            return self.grid_districts
        raise ValueError("districts is required when no grid stripes are configured")


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Загружает конфигурацию прогона из JSON-файла и применяет переопределения CLI
    :param path: Путь к плоскому JSON-документу (может отсутствовать)
    :param overrides: Значения из командной строки (None игнорируются)
    :return: Проверенная RunConfig
    """
    document: Dict[str, Any] = {}
    if path:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
        logger.info(f"Run config loaded from {path}")

    for key, value in (overrides or {}).items():
        if value is not None:
            document[key] = value

    return RunConfig(**document)
