"""Slab-parallel driver for the x-independent momentum sweeps.

Work is split into contiguous x-slabs; each slab is written by exactly one
worker and nothing is reduced across slabs here, so results do not depend on
the worker count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def resolve_workers(configured: int = 1) -> int:
    env = os.environ.get("RVMFP_WORKERS")
    n = int(env) if env else int(configured)
    return max(1, n)


class SlabPool:
    def __init__(self, workers: int = 1):
        self.workers = max(1, int(workers))
        self._pool = ThreadPoolExecutor(self.workers) if self.workers > 1 else None

    def slabs(self, nx: int):
        bounds = np.linspace(0, nx, min(self.workers, nx) + 1).astype(int)
        return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    def map(self, fn, nx: int):
        """Call fn(lo, hi) for every slab and wait for all of them."""
        parts = self.slabs(nx)
        if self._pool is None:
            for lo, hi in parts:
                fn(lo, hi)
            return
        for fut in [self._pool.submit(fn, lo, hi) for lo, hi in parts]:
            fut.result()

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None
