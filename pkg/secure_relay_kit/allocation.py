"""Subcarrier allocation on the R->U hop.
Each subcarrier goes to the user with the largest gain; the runner-up is the
equivalent eavesdropper, since every other user is untrusted.
"""
import collections
import logging

import numpy as np

LOG = logging.getLogger(__name__)

Assignment = collections.namedtuple('Assignment', ['user', 'eav', 'gain_rm', 'gain_re'])


def allocate(realization):
    """Return Assignment indexed by R->U subcarrier o.
    Ties go to the lowest user index (stable sort on negated gains).
    """
    g = realization.gain_ru
    if g.shape[0] < 2:
        raise ValueError('need at least 2 users')
    order = np.argsort(-g, axis=0, kind='stable')
    user = order[0]
    eav = order[1]
    cols = np.arange(g.shape[1])
    gain_rm = g[user, cols]
    gain_re = g[eav, cols]
    ties = int(np.count_nonzero(gain_rm == gain_re))
    if ties:
        LOG.debug('{} subcarrier(s) with tied winner/eavesdropper gains; they carry no secure rate.'.format(ties))
    return Assignment(user=user, eav=eav, gain_rm=gain_rm, gain_re=gain_re)


def is_argmax(realization, assignment):
    """True if every subcarrier went to a max-gain user.
    """
    g = realization.gain_ru
    cols = np.arange(g.shape[1])
    return bool(np.all(g[assignment.user, cols] == g.max(axis=0)))


def reassign(realization, users):
    """Assignment for an arbitrary user choice per subcarrier,
    with the strongest other user as eavesdropper. Used to show that
    non-argmax choices lose all secure rate.
    """
    g = realization.gain_ru
    users = np.asarray(users, dtype=int)
    cols = np.arange(g.shape[1])
    others = np.array(g, dtype=float)
    others[users, cols] = -np.inf
    eav = np.argmax(others, axis=0)
    return Assignment(user=users, eav=eav, gain_rm=g[users, cols], gain_re=g[eav, cols])
