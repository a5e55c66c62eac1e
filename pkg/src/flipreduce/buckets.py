"""Bucket index over integer counters with a moving threshold.

Items live in one bucket per value 0..k, in an overflow bucket for values
above k, or in an infinity bucket.  Insertion-ordered dicts serve as the
linked lists, so moves are O(1) and iteration order is deterministic.
"""

from __future__ import annotations

from typing import Hashable, Iterator

INF = None  # counter value for the ∞ sentinel


class BucketIndex:
    def __init__(self, k: int):
        if k < 0:
            raise ValueError("threshold must be non-negative")
        self.k = k
        self._low: list[dict] = [dict() for _ in range(k + 1)]
        self._over: dict = {}
        self._inf: dict = {}
        self._value: dict = {}

    def __len__(self) -> int:
        return len(self._value)

    def __contains__(self, item) -> bool:
        return item in self._value

    def value(self, item):
        return self._value[item]

    def _bucket(self, value) -> dict:
        if value is INF:
            return self._inf
        if value > self.k:
            return self._over
        return self._low[value]

    def set(self, item: Hashable, value) -> None:
        if value is not INF and value < 0:
            raise ValueError("counter values are non-negative")
        if item in self._value:
            old = self._value[item]
            if old == value:
                return
            b_old, b_new = self._bucket(old), self._bucket(value)
            if b_old is not b_new:
                del b_old[item]
                b_new[item] = None
        else:
            self._bucket(value)[item] = None
        self._value[item] = value

    def add(self, item: Hashable, delta: int) -> None:
        old = self._value[item]
        if old is INF:
            return
        self.set(item, old + delta)

    def remove(self, item: Hashable) -> None:
        value = self._value.pop(item)
        del self._bucket(value)[item]

    def discard(self, item: Hashable) -> None:
        if item in self._value:
            self.remove(item)

    def lower_threshold(self, k: int) -> None:
        """Move to a smaller threshold; buckets above it join the overflow."""
        if k > self.k:
            raise ValueError("threshold can only decrease")
        if k < 0:
            k = 0
        for value in range(k + 1, self.k + 1):
            self._over.update(self._low[value])
        del self._low[k + 1:]
        self.k = k

    def above(self) -> list:
        """Items whose value exceeds the threshold (including ∞)."""
        return list(self._over) + list(self._inf)

    def at_least(self, value: int) -> Iterator:
        """Items with counter >= value, including overflow and ∞."""
        for v in range(max(value, 0), self.k + 1):
            yield from list(self._low[v])
        yield from self.above()
