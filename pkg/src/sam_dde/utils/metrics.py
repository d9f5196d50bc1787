"""
メトリクス収集基盤
"""

import time
from typing import Any, Callable, Dict, List


class MetricsCollector:
    def __init__(self) -> None:
        self.metrics: Dict[str, Any] = {}
        self.samples: Dict[str, List[float]] = {}

    def increment(self, name: str, amount: int = 1) -> None:
        self.metrics[name] = self.metrics.get(name, 0) + amount

    def timer(self, name: str) -> Callable[[], float]:
        """Start a wall-clock timer; the returned closure stops it and returns seconds."""
        start = time.perf_counter()

        def done() -> float:
            elapsed = time.perf_counter() - start
            self.metrics[name] = elapsed
            self.samples.setdefault(name, []).append(elapsed)
            return elapsed

        return done

    def get_samples(self, name: str) -> List[float]:
        return list(self.samples.get(name, []))

    def get_metrics(self) -> Dict[str, Any]:
        return dict(self.metrics)

    def reset(self) -> None:
        self.metrics.clear()
        self.samples.clear()


metrics = MetricsCollector()
