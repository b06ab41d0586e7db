import os
from concurrent.futures import ThreadPoolExecutor


def worker_count():
    """Number of worker threads for batch LP sweeps, from ``INVKIT_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("INVKIT_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    """Order-preserving map, threaded when more than one worker is allowed."""
    items = list(items)
    workers = worker_count()
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
