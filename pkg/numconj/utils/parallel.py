"""Order-preserving parallel map over independent pure computations."""

from __future__ import annotations

from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> list[R]:
    """Apply ``fn`` to every item; results come back in input order.

    With ``jobs > 1`` the work is spread over a process pool, so ``fn`` and the
    items must be picklable (module-level functions, frozen dataclasses).
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        chunksize = max(1, len(items) // (jobs * 4))
        return list(executor.map(fn, items, chunksize=chunksize))
