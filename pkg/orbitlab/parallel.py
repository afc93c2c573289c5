from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional

from orbitlab.conf import get_setting


def parallel_map(fn: Callable, items: Iterable, threads: Optional[int] = None) -> List:
    """
    Maps ``fn`` over ``items`` on a thread pool and returns the results in input order, so any fold over the
    result does not depend on the number of workers.

    :param threads: Worker count, defaults to the THREADS setting
    """
    items = list(items)
    threads = threads or get_setting('THREADS')
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(fn, items))
