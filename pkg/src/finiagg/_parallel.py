"""Deterministic worker-pool helper.

Results are always returned in input order, keyed by index, so any worker
count produces identical output. ``FINIAGG_THREADS`` caps the pool size.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def env_workers(default: int = 1) -> int:
    raw = os.environ.get("FINIAGG_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return default
    return max(1, n)


def ordered_map(fn: Callable[[T], R], items: Sequence[T] | Iterable[T], workers: int = 1) -> list[R]:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
