import time
import logging
from contextlib import contextmanager
from datetime import datetime
from typing import Dict, Iterator, Optional

import psutil

from config import Config


class MonitoringService:
    def __init__(self, history: Optional[int] = None):
        self.logger = logging.getLogger("monitoring_service")
        self.history = history or Config.METRIC_HISTORY
        self.metrics: Dict[str, Dict] = {}
        self.counters: Dict[str, float] = {}
        self.errors: Dict[str, Dict] = {}
        self.start_time = time.perf_counter()
        self.started_at = datetime.now()
        self._process = psutil.Process()

    def record_metric(self, component: str, name: str, value: float, tags: Dict = None):
        """
        Регистрирует значение метрики
        :param component: Компонент (flip, recom, runner, tempering)
        :param name: Название метрики (steps_per_second, tree_redraws)
        :param value: Значение
        :param tags: Дополнительные теги
        """
        metric_key = f"{component}.{name}"
        if metric_key not in self.metrics:
            self.metrics[metric_key] = {"values": [], "tags": tags or {}}

        values = self.metrics[metric_key]["values"]
        values.append(value)
        # Храним только последние значения
        if len(values) > self.history:
            values.pop(0)

    def increment(self, component: str, name: str, amount: float = 1):
        key = f"{component}.{name}"
        self.counters[key] = self.counters.get(key, 0) + amount

    def log_error(self, component: str, error_type: str, message: str, details: Dict = None):
        """Регистрирует ошибку компонента"""
        error_key = f"{component}.{error_type}"
        entry = self.errors.setdefault(error_key, {"count": 0, "messages": []})
        entry["count"] += 1
        entry["messages"].append({"message": message, "details": details or {}})
        if len(entry["messages"]) > 20:
            entry["messages"].pop(0)
        self.logger.error(f"{error_key}: {message}")

    @contextmanager
    def trace(self, name: str) -> Iterator[None]:
        """Замер длительности блока в секундах -> метрика '<name>.seconds'"""
        started = time.perf_counter()
        try:
            yield
        finally:
            component, _, metric = name.rpartition(".")
            self.record_metric(component or name, f"{metric or name}_seconds", time.perf_counter() - started)

    def get_metrics(self, component: str = None, name: str = None) -> Dict:
        if component and name:
            return self.metrics.get(f"{component}.{name}", {})
        if component:
            return {k: v for k, v in self.metrics.items() if k.startswith(f"{component}.")}
        return self.metrics

    def system_snapshot(self) -> Dict[str, float]:
        """Ресурсы процесса через psutil"""
        memory = self._process.memory_info()
        return {
            "rss_mb": memory.rss / (1024 ** 2),
            "cpu_percent": self._process.cpu_percent(interval=None),
            "elapsed_seconds": time.perf_counter() - self.start_time,
        }

    def report(self) -> Dict:
        """Сводный отчет: последние/средние/мин/макс значения метрик и счетчики"""
        summary = {}
        for metric, data in self.metrics.items():
            values = data["values"]
            if values:
                summary[metric] = {
                    "last": values[-1],
                    "avg": sum(values) / len(values),
                    "min": min(values),
                    "max": max(values),
                }
        return {
            "started_at": self.started_at.isoformat(timespec="seconds"),
            "metrics": summary,
            "counters": dict(self.counters),
            "errors": {k: v["count"] for k, v in self.errors.items()},
            "system": self.system_snapshot(),
        }

    def log_report(self):
        report = self.report()
        self.logger.info(f"Run counters: {report['counters']}")
        for metric, stats in report["metrics"].items():
            self.logger.info(
                f"{metric}: last={stats['last']:.4g} avg={stats['avg']:.4g} "
                f"min={stats['min']:.4g} max={stats['max']:.4g}"
            )
        system = report["system"]
        self.logger.info(
            f"Process: rss={system['rss_mb']:.1f}MB cpu={system['cpu_percent']:.0f}% "
            f"elapsed={system['elapsed_seconds']:.1f}s"
        )
