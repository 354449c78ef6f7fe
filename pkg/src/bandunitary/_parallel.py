import os
from concurrent.futures import ProcessPoolExecutor


def default_workers():
    return os.cpu_count() or 1


def ordered_map(fn, items, workers=None):
    """Map ``fn`` over ``items`` and return results in input order.

    Results are identical for every pool size because each item carries its
    own RNG identity and aggregation happens afterwards in index order.
    """
    items = list(items)
    if workers is None:
        workers = 1
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
