"""Deterministic random substreams and batch execution.

Estimators split their work into fixed-size batches; batch i draws from the
generator derived from (master seed, i).  The batch plan depends only on the
total count, and partial results merge in batch order, so estimates are
bit-identical for every worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

DEFAULT_BATCH = 4096

T = TypeVar("T")


def substream(seed: int, *indices: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, indices)]))


def batch_plan(total: int, batch_size: int = DEFAULT_BATCH) -> list[tuple[int, int]]:
    """(batch index, batch count) pairs covering `total` samples."""
    plan = []
    done = 0
    i = 0
    while done < total:
        n = min(batch_size, total - done)
        plan.append((i, n))
        done += n
        i += 1
    return plan


def run_batches(plan: Sequence[tuple[int, int]],
                worker: Callable[[int, int], T],
                threads: int = 1) -> list[T]:
    """Run worker(batch_index, batch_count) for every batch, results in plan order."""
    if threads <= 1 or len(plan) <= 1:
        return [worker(i, n) for i, n in plan]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, i, n) for i, n in plan]
        return [f.result() for f in futures]
