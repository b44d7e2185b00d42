""" Run independent per-sample jobs in a bounded pool of worker threads."""
import asyncio
import logging
import typing

logger = logging.getLogger('tnrd')

T = typing.TypeVar('T')
R = typing.TypeVar('R')


async def _runOne(semaphore: asyncio.Semaphore, fn: typing.Callable[[T], R], item: T) -> R:
    async with semaphore:
        return await asyncio.to_thread(fn, item)


async def runMany(fn: typing.Callable[[T], R], items: typing.Sequence[T], workers: int) -> list[R]:
    """ Calls 'fn' for every item with at most 'workers' calls running at once.
    Args:
        fn (Callable): job, must not mutate shared state
        items (Sequence): job arguments
        workers (int): maximum number of concurrent jobs
    Returns:
        list: results in the order of 'items'
    """
    if not items:
        return []
    semaphore = asyncio.Semaphore(max(1, workers))
    tasks = [_runOne(semaphore, fn, item) for item in items]
    return list(await asyncio.gather(*tasks))


def mapInWorkers(fn: typing.Callable[[T], R], items: typing.Sequence[T], workers: int = 1) -> list[R]:
    """ Ordered map over 'items'; sequential for a single worker."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug(f'{len(items)} jobs on {workers} workers')
    return asyncio.run(runMany(fn, items, workers))
