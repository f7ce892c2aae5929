import hashlib
import logging
from collections import OrderedDict
from typing import Any, Callable, Dict, Iterable, Optional

from config import Config


class CacheService:
    def __init__(self, max_entries: Optional[int] = None):
        self.logger = logging.getLogger("cache_service")
        self.max_entries = max_entries or Config.CACHE_MAX_ENTRIES
        self.memory_cache: "OrderedDict[str, Any]" = OrderedDict()
        self.stats = {
            "hits": 0,
            "misses": 0,
            "evictions": 0,
        }

    def get(self, key: str, loader: Optional[Callable[[], Any]] = None) -> Any:
        """
        Получает значение из кеша. Если нет - загружает через loader.
        :param key: Ключ кеша
        :param loader: Функция для загрузки данных при отсутствии в кеше
        :return: Значение из кеша или результат loader
        """
        if key in self.memory_cache:
            self.stats["hits"] += 1
            return self.memory_cache[key]

        self.stats["misses"] += 1
        if loader is None:
            return None
        value = loader()
        self.set(key, value)
        return value

    def set(self, key: str, value: Any) -> None:
        if key not in self.memory_cache and len(self.memory_cache) >= self.max_entries:
            self._evict_old_entries()
        self.memory_cache[key] = value

    def _evict_old_entries(self, num_to_evict: int = 1) -> None:
        """Удаляет самые старые записи"""
        for _ in range(min(num_to_evict, len(self.memory_cache))):
            self.memory_cache.popitem(last=False)
            self.stats["evictions"] += 1

    def clear(self) -> None:
        self.memory_cache.clear()

    def get_stats(self) -> Dict[str, Any]:
        """Возвращает статистику использования кеша"""
        lookups = self.stats["hits"] + self.stats["misses"]
        return {
            "hits": self.stats["hits"],
            "misses": self.stats["misses"],
            "evictions": self.stats["evictions"],
            "entries": len(self.memory_cache),
            "hit_rate": self.stats["hits"] / max(1, lookups),
        }

    @staticmethod
    def node_set_key(prefix: str, nodes: Iterable[int]) -> str:
        """Ключ для множества узлов: хеш отсортированного кортежа"""
        payload = ",".join(str(v) for v in sorted(nodes))
        return f"{prefix}:{hashlib.sha256(payload.encode()).hexdigest()}"
