import os
from concurrent.futures import ThreadPoolExecutor


def max_workers() -> int:
    """Worker cap from ``LOGDIV_THREADS`` (default: CPU count)."""
    raw = os.environ.get("LOGDIV_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def parallel_map(fn, items, workers=None):
    """``list(map(fn, items))``, threaded when more than one worker is allowed.

    Results keep input order.
    """
    items = list(items)
    workers = max_workers() if workers is None else max(1, int(workers))
    workers = min(workers, len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
