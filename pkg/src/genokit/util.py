"""Small shared helpers: deterministic parallel mapping and RNG spawning."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def parallel_map(fn, items, threads=1):
    """Map ``fn`` over ``items`` preserving order.

    Work is partitioned by the caller (fixed chunks), never by thread count,
    so results are identical for any ``threads`` value.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def spawn_rngs(seed, n):
    """n independent generators derived from one seed (reproducible streams)."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def chunk_ranges(total, size):
    """Half-open (start, stop) chunks covering range(total) in fixed-size steps."""
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]
