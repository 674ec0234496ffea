import logging
import os

log = logging.getLogger(__name__)


def make_dirs(d):
    if d and not os.path.isdir(d):
        log.debug('mkdir -p {!r}'.format(d))
        os.makedirs(d)


mkdirs = make_dirs


def master_seed(seed):
    """Return a usable 64-bit master seed.
    A falsy seed means 'draw one from the OS', and we log it so the run can be repeated.
    """
    import numpy as np
    if seed in (None, ''):
        seed = int(np.random.SeedSequence().entropy % 2**64)
        log.info('Random master seed: {}'.format(seed))
    seed = int(seed)
    if not (0 <= seed < 2**64):
        raise ValueError('seed must fit in 64 unsigned bits, not {}'.format(seed))
    return seed
