"""
The equal_*() funcs are not really needed with pytest,
but they do not hurt.
"""

from secure_relay_kit.channel_model import ChannelRealization
from secure_relay_kit.allocation import allocate
import os.path

import numpy as np


def equal_list(a, b):
    assert set(a) ^ set(b) == set()


def equal_dict(a, b):
    equal_list(sorted(a.keys()), sorted(b.keys()))
    for k in list(a.keys()):
        assert \
            a[k] == b[k], 'Inequal at k={!r} ({!r}!={!r})'.format(k, a[k], b[k])


def get_test_data_dir():
    return os.path.join(os.path.dirname(__file__), '..', 'test_data')


def random_instance(rng, N, M=2, spread=1.0):
    """Realization and assignment with log-uniform gains, for property tests.
    """
    gain_sr = 10.0 ** rng.uniform(-spread, spread, size=N)
    gain_ru = 10.0 ** rng.uniform(-spread, spread, size=(M, N))
    r = ChannelRealization(gain_sr, gain_ru, 1.0)
    return r, allocate(r)


def instance(gain_sr, gain_ru, noise=1.0):
    r = ChannelRealization(np.asarray(gain_sr, dtype=float), np.asarray(gain_ru, dtype=float), noise)
    return r, allocate(r)
