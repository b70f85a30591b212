"""Utility to fan simulation chunks out to worker processes with a timeout."""

import asyncio
import os
from collections.abc import Callable, Sequence
from concurrent.futures import Executor, ProcessPoolExecutor
from typing import TypeVar

from .base import ConfigurationError

T = TypeVar("T")
R = TypeVar("R")


def default_workers() -> int:
    """Worker count from NOMA_WORKERS, else the number of CPUs."""
    value = os.getenv("NOMA_WORKERS")
    if value:
        try:
            workers = int(value)
        except ValueError:
            workers = 0
        if workers >= 1:
            return workers
        raise ConfigurationError(f"NOMA_WORKERS must be a positive integer, got {value!r}")
    return os.cpu_count() or 1


async def run(
    func: Callable[[T], R],
    tasks: Sequence[T],
    executor: Executor | None = None,
    timeout: float | None = None,  # seconds
) -> list[R]:
    """
    Applies func to every task and returns the results in task order.
    Without an executor the tasks run inline in the calling process.
    """
    if executor is None:
        return [func(task) for task in tasks]

    loop = asyncio.get_running_loop()
    futures = [loop.run_in_executor(executor, func, task) for task in tasks]
    try:
        return list(await asyncio.wait_for(asyncio.gather(*futures), timeout=timeout))
    except asyncio.TimeoutError as exc:
        for future in futures:
            future.cancel()
        raise TimeoutError(
            f"{len(tasks)} {getattr(func, '__name__', 'worker')} tasks timed out after {timeout} seconds"
        ) from exc


def make_executor(workers: int) -> ProcessPoolExecutor | None:
    """A process pool for more than one worker, otherwise None (inline)."""
    return ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
