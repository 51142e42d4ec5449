"""Order-preserving thread map capped by ``SYNUTIL_THREADS``."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def thread_count(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("SYNUTIL_THREADS", "").strip()
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ValueError(f"SYNUTIL_THREADS must be an integer, got {env!r}") from None
        else:
            threads = os.cpu_count() or 1
    return max(1, int(threads))


def pmap(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    items = list(items)
    n = min(thread_count(threads), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def derived_rng(seed: int, *path: int) -> np.random.Generator:
    """Independent stream for replicate ``path`` under ``seed``; stable across runs and thread counts."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))


def derived_seed(seed: int, *path: int) -> int:
    """Integer seed for a sub-stream, for APIs that take a plain seed."""
    return int(np.random.SeedSequence([int(seed), *map(int, path)]).generate_state(1, np.uint64)[0] >> 1)
