"""Env-partitioned execution. Chunking never changes results, only who computes them."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")


def partition(n: int, workers: int) -> list[np.ndarray]:
    """Split ``range(n)`` into at most ``workers`` contiguous, non-empty index chunks."""
    workers = max(1, min(int(workers), n)) if n else 1
    return [c for c in np.array_split(np.arange(n), workers) if len(c)]


def map_chunks(fn: Callable[[np.ndarray], T], n: int, workers: int = 1) -> list[T]:
    chunks = partition(n, workers)
    if len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        return list(pool.map(fn, chunks))


def map_items(fn: Callable[[int], T], items: Sequence[int], workers: int = 1) -> list[T]:
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
