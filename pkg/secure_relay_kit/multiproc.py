"""Worker pools for trials and pairing enumeration.

Jobs are pure functions of picklable tuples, so the serial pool and a
multiprocessing.Pool give identical results in identical order.
"""
import logging
import multiprocessing

LOG = logging.getLogger(__name__)


class SerialPool(object):
    """The subset of multiprocessing.Pool we use, run in this process.
    imap is lazy, so progress is reported as trials finish.
    """

    def map(self, func, iterable, chunksize=None):
        return [func(job) for job in iterable]

    def imap(self, func, iterable, chunksize=1):
        return (func(job) for job in iterable)

    def terminate(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *args):
        self.terminate()


def Pool(n_core):
    """SerialPool for n_core <= 1, else a multiprocessing.Pool of n_core workers.
    Use as a context manager; leaving it terminates the workers.
    """
    if not n_core or n_core <= 1:
        return SerialPool()
    LOG.debug('Starting {} worker processes.'.format(n_core))
    return multiprocessing.Pool(n_core)
