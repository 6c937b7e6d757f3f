import logging
from concurrent.futures import ProcessPoolExecutor

from src.config import DEFAULT_THREADS

logger = logging.getLogger(__name__)


def parallel_map(func, tasks, threads=None, initializer=None, initargs=()):
    """
    Runs func over tasks and returns the results in task order.

    With threads <= 1 everything runs in-process; otherwise the tasks fan out to
    a process pool. executor.map keeps input order, so the merge is the same
    whatever the worker count.

    initializer(*initargs) runs once per worker before its first task (and once
    in-process on the serial path), for shared state too large to ship with
    every task.
    """
    tasks = list(tasks)
    threads = DEFAULT_THREADS if threads is None else threads
    if threads <= 1 or len(tasks) <= 1:
        if initializer is not None:
            initializer(*initargs)
        return [func(t) for t in tasks]

    workers = min(threads, len(tasks))
    logger.debug("Fanning out %d tasks over %d workers", len(tasks), workers)
    with ProcessPoolExecutor(max_workers=workers, initializer=initializer, initargs=initargs) as executor:
        return list(executor.map(func, tasks))


def split_range(total, chunks):
    """Splits range(total) into at most `chunks` contiguous (start, stop) blocks."""
    chunks = max(1, min(chunks, total)) if total else 1
    bounds = [total * k // chunks for k in range(chunks + 1)]
    return [(bounds[k], bounds[k + 1]) for k in range(chunks) if bounds[k] < bounds[k + 1]]
