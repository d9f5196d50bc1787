"""
LRUCache実装 (dense reference solutions, keyed by content hash)
"""

from collections import OrderedDict
from typing import Any, Dict, Optional


class LRUCache:
    """Bounded mapping that evicts the least recently used entry."""

    def __init__(self, max_size: int = 64):
        if max_size < 1:
            raise ValueError(f"max_size must be >= 1, got {max_size}")
        self.cache: OrderedDict[Any, Any] = OrderedDict()
        self.capacity = max_size
        self.hits = 0
        self.misses = 0
        self.evictions = 0

    def __len__(self) -> int:
        return len(self.cache)

    def get_stats(self) -> Dict[str, Any]:
        lookups = self.hits + self.misses
        return {
            "size": len(self),
            "max_size": self.capacity,
            "hits": self.hits,
            "misses": self.misses,
            "evictions": self.evictions,
            "hit_rate": self.hits / lookups if lookups > 0 else 0.0,
        }

    def get(self, key: Any) -> Optional[Any]:
        if key not in self.cache:
            self.misses += 1
            return None
        self.cache.move_to_end(key)
        self.hits += 1
        return self.cache[key]

    def set(self, key: Any, value: Any) -> None:
        self.cache[key] = value
        self.cache.move_to_end(key)
        while len(self.cache) > self.capacity:
            self.cache.popitem(last=False)
            self.evictions += 1
