"""Internal thread-pool policy.

SPECTRA_THREADS caps worker counts across the toolkit (0 or unset = auto).
Results are always assembled in input order, so callers see identical
output for any thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_limit() -> int:
    raw = os.environ.get("SPECTRA_THREADS", "0").strip()
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        return os.cpu_count() or 1
    return n


def parallel_map(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Map preserving order; falls back to a plain loop for one worker."""
    workers = min(thread_limit(), len(items)) if items else 1
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
