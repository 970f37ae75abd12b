"""Thread-pool helpers.

Parallelism in this package happens at the task level (parameter-shift
evaluations, expectation term blocks, independent runs); the jitted kernels
release the GIL, so plain thread pools scale. Results are always collected
in submission order, which keeps every reduction deterministic regardless
of thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "VQEMETA_THREADS"

_pools: dict[int, ThreadPoolExecutor] = {}


def resolve_threads(threads: int | None = None) -> int:
    """Pick a thread count: explicit argument, else env var, else 1."""
    if threads is not None:
        if threads < 1:
            raise ValueError(f"thread count must be >= 1, got {threads}")
        return threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}")
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1, got {n}")
        return n
    return 1


def _pool(threads: int) -> ThreadPoolExecutor:
    # Pools are cached per size; ThreadPoolExecutor reuse is cheap and safe.
    pool = _pools.get(threads)
    if pool is None:
        pool = ThreadPoolExecutor(max_workers=threads)
        _pools[threads] = pool
    return pool


def parallel_map(fn, items, threads: int) -> list:
    """Map ``fn`` over ``items``, preserving order.

    Serial when ``threads == 1`` or there is at most one item, so small
    problems never pay pool overhead.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    return list(_pool(threads).map(fn, items))
