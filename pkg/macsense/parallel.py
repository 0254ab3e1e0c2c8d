"""
Ordered fan-out over independent evaluations.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from . import settings

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """func over items; results come back in input order whatever the thread count"""
    items = list(items)
    threads = settings.THREADS if threads is None else threads
    if threads <= 1 or len(items) < 2:
        return [func(item) for item in items]
    logger.debug(f"Evaluating {len(items)} items on {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))
