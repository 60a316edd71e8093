from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def expand_level(frontier: Sequence[T], expand: Callable[[T], R], threads: int = 1) -> list[R]:
    """
    Expands every frontier entry, possibly on several threads.

    Results come back in frontier order whatever the thread count, so the
    caller can merge them into its dedupe table deterministically.
    """
    if threads <= 1 or len(frontier) < 2 * threads:
        return [expand(item) for item in frontier]
    chunk = max(1, len(frontier) // (threads * 4))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(expand, frontier, chunksize=chunk))
