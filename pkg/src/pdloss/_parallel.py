"""Thread-count control for the few embarrassingly parallel loops.

Work is split into contiguous chunks whose results are concatenated in
index order, so outputs never depend on how many threads ran.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

ENV_THREADS = "PDL_THREADS"
_DEFAULT_THREADS = 1


def thread_count() -> int:
    raw = os.environ.get(ENV_THREADS)
    if raw is None or raw == "":
        return _DEFAULT_THREADS
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_THREADS} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{ENV_THREADS} must be a positive integer, got {raw!r}")
    return n


def map_rows(fn: Callable[[int, int], np.ndarray], n: int, min_chunk: int = 64) -> np.ndarray:
    """Evaluate ``fn(start, stop)`` over row blocks of ``range(n)`` and concatenate."""
    threads = min(thread_count(), max(1, n // min_chunk))
    if threads <= 1:
        return fn(0, n)
    bounds = np.linspace(0, n, threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(fn, bounds[:-1], bounds[1:]))
    return np.concatenate(parts, axis=0)
