"""Bounded worker pool for Monte-Carlo instances.

Each instance job is synchronous numpy/scipy work; the pool runs up to ``threads``
of them at once in worker threads and returns results in submission order, so the
output of a study never depends on scheduling.
"""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Callable, Sequence
from typing import TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class InstancePool:
    def __init__(self, threads: int = 1) -> None:
        if threads < 1:
            raise ValueError(f"threads must be at least 1, got {threads}")
        self.threads = threads

    async def map(self, fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
        sem = asyncio.Semaphore(self.threads)
        done = 0

        async def _one(item: T) -> R:
            nonlocal done
            async with sem:
                result = await asyncio.to_thread(fn, item)
            done += 1
            if done % 100 == 0 or done == len(items):
                logger.debug("instance jobs: %d/%d done", done, len(items))
            return result

        return list(await asyncio.gather(*(_one(item) for item in items)))

    def run(self, fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
        """Synchronous entry point for callers outside an event loop."""
        return asyncio.run(self.map(fn, items))
