"""Worker-count handling; CDPLAB_THREADS caps the pool size."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def worker_count() -> int:
    raw = os.environ.get("CDPLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """Map preserving input order; threads only when CDPLAB_THREADS > 1."""
    items = list(items)
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def split_seed(seed, n: int) -> list[np.random.SeedSequence]:
    """Fixed splitting of a root seed into ``n`` child sequences."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return root.spawn(n)
