"""recondg: per-cell task runner"""

import concurrent.futures as _futures


def parallel_map(func, items, threads=1):
    """Apply func to items, results keep the order of items

    Arguments:
        func: callable taking one item
        items: iterable of work items
        threads: worker count, 1 runs inline

    Returns:
        list of results

    Raises:
        first exception raised by func, in item order
    """
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with _futures.ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items))
