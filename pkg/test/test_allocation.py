import secure_relay_kit.allocation as mod
from secure_relay_kit.channel_model import ChannelRealization
from secure_relay_kit.rates import secure_rate_af, secure_rate_df
import helpers
import pytest

import numpy as np


def test_allocate_two_users():
    r = ChannelRealization([1.0], [[0.9], [0.4]], 1.0)
    a = mod.allocate(r)
    assert a.user.tolist() == [0]
    assert a.eav.tolist() == [1]
    assert a.gain_rm.tolist() == [0.9]
    assert a.gain_re.tolist() == [0.4]


def test_allocate_tie_lowest_index():
    r = ChannelRealization([1.0, 1.0], [[0.5, 0.2], [0.5, 0.7], [0.5, 0.1]], 1.0)
    a = mod.allocate(r)
    assert a.user.tolist() == [0, 1]
    assert a.eav.tolist() == [1, 0]
    assert a.gain_rm[0] == a.gain_re[0]
    assert secure_rate_af(1.0, 1.0, 1.0, a.gain_rm[0], a.gain_re[0], 1.0) == 0.0


def test_allocate_matches_exhaustive_scan():
    rng = np.random.default_rng(4)
    r = ChannelRealization(rng.uniform(0.1, 2, 6), rng.uniform(0.1, 2, (4, 6)), 1.0)
    a = mod.allocate(r)
    for o in range(6):
        col = [r.gain_ru[m][o] for m in range(4)]
        best = max(range(4), key=lambda m: col[m])
        second = max((m for m in range(4) if m != best), key=lambda m: col[m])
        assert a.user[o] == best
        assert a.eav[o] == second
    assert mod.is_argmax(r, a)
    assert np.all(a.user != a.eav)
    assert np.all(a.gain_rm >= a.gain_re)


def test_allocate_needs_two_users():
    class OneUser(object):
        gain_ru = np.ones((1, 3))
    with pytest.raises(ValueError):
        mod.allocate(OneUser())


def test_non_argmax_loses_secure_rate():
    rng = np.random.default_rng(5)
    r, a = helpers.random_instance(rng, 4, M=3)
    users = (a.user + 1) % 3  # never the winner
    other = mod.reassign(r, users)
    assert not mod.is_argmax(r, other)
    for (ps, pr) in [(0.1, 0.1), (1.0, 5.0), (100.0, 3.0)]:
        for o in range(4):
            args = (ps, pr, 1.0, other.gain_rm[o], other.gain_re[o], 1.0)
            assert secure_rate_af(*args) == 0.0
            assert secure_rate_df(*args) == 0.0
