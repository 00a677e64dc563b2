"""Order-preserving parallel map used by the sampled checks."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

_THREADS = None


def set_threads(n):
    global _THREADS
    _THREADS = None if n is None else max(1, int(n))


def default_threads():
    return _THREADS or os.cpu_count() or 1


def pmap(fn, items, threads=None):
    """``[fn(i) for i in items]`` spread over a thread pool.

    Results come back in input order, so output does not depend on the
    thread count.
    """
    items = list(items)
    threads = threads or default_threads()
    if threads <= 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
