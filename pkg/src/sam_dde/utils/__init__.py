"""
ユーティリティモジュール
"""

from .cache import LRUCache
from .logging import configure_logging, get_sam_logger
from .metrics import MetricsCollector

__all__ = [
    "configure_logging",
    "get_sam_logger",
    "MetricsCollector",
    "LRUCache",
]
