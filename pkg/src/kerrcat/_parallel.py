import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor

ENV_THREADS = "KERRCAT_THREADS"


def worker_count() -> int:
    raw = os.environ.get(ENV_THREADS)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{ENV_THREADS} must be a positive integer, got {raw!r}") from None
    return os.cpu_count() or 1


def pmap(fn, items, processes=False):
    """Ordered map, fanned out over at most ``KERRCAT_THREADS`` workers."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(item) for item in items]
    pool = ProcessPoolExecutor if processes else ThreadPoolExecutor
    with pool(max_workers=n) as ex:
        return list(ex.map(fn, items))
