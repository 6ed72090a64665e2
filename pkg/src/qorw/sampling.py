"""Seeded random streams and angle sampling from the diagonal walker density.

Stream splitting: a base ``numpy.random.SeedSequence(seed)`` is spawned into
one child per worker; worker ``w`` draws the ``w``-th contiguous block of
samples (block sizes differ by at most one, larger blocks first). Results are
therefore bit-reproducible for a fixed ``(seed, workers)`` pair.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")

CDF_NODES = 4096


def default_workers() -> int:
    env = os.environ.get("QORW_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def split_counts(total: int, workers: int) -> list[int]:
    base, extra = divmod(total, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def worker_generators(seed: int, workers: int) -> list[np.random.Generator]:
    return [np.random.default_rng(ss) for ss in np.random.SeedSequence(seed).spawn(workers)]


def run_workers(seed: int, total: int, workers: int,
                job: Callable[[np.random.Generator, int], T]) -> list[T]:
    """Run ``job(rng, count)`` for each worker block; results in worker order."""
    workers = max(1, min(workers, total)) if total > 0 else 1
    gens = worker_generators(seed, workers)
    counts = split_counts(total, workers)
    if workers == 1:
        return [job(gens[0], counts[0])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, gens, counts))


def piecewise_linear_cdf(cdf_fn: Callable[[np.ndarray], np.ndarray],
                         nodes: int = CDF_NODES) -> tuple[np.ndarray, np.ndarray]:
    x = 2.0 * np.pi * np.arange(nodes + 1) / nodes
    c = np.maximum.accumulate(np.asarray(cdf_fn(x), dtype=float))
    c = (c - c[0]) / (c[-1] - c[0])
    return x, c


def sample_angles(rng: np.random.Generator, size: int, grid: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """Inverse-transform sampling on a tabulated CDF over ``[0, 2 pi]``."""
    x, c = grid
    return np.interp(rng.random(size), c, x)
