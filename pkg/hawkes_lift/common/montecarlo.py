"""Seed-indexed Monte Carlo execution.

Every task is a pure function of its seed; results come back in seed order so
that any aggregation is independent of the pool size.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

from hawkes_lift.common.logging import get_logger

logger = get_logger(__name__)

T = TypeVar("T")


def default_threads() -> int:
    """Machine parallelism, overridable with HAWKES_LIFT_THREADS."""
    env = os.environ.get("HAWKES_LIFT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_seeded(task: Callable[[int], T], seeds: Sequence[int], threads: Optional[int] = None) -> List[T]:
    """Run ``task(seed)`` for every seed, returning results in ``seeds`` order."""
    workers = threads or default_threads()
    seeds = list(seeds)
    if workers <= 1 or len(seeds) <= 1:
        return [task(seed) for seed in seeds]
    logger.debug(f"Running {len(seeds)} seeded tasks on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, seeds))


def mean_and_se(samples) -> tuple:
    """Sample mean and standard error; SE is NaN for fewer than two samples."""
    values = np.asarray(samples, dtype=float)
    if values.size == 0:
        return float("nan"), float("nan")
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, float("nan")
    return mean, float(np.std(values, ddof=1) / np.sqrt(values.size))
