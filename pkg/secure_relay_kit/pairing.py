"""Subcarrier pairing: which R->U subcarrier o = perm[n] forwards what arrived on S->R subcarrier n.

All policies here are rank matchings: sort S->R subcarriers by gain, sort
R->U subcarriers by a policy key, and pair them off in order.
"""
from .functional import check_permutation
from .power_df import (DfCase, DfRegime, secure_waterfill, solve_df)
from .rates import AF, DF, check_mode, pair_gains, sum_secure_rate
import collections
import itertools
import logging
import math

import numpy as np

LOG = logging.getLogger(__name__)

EffectiveGains = collections.namedtuple('EffectiveGains', ['value', 'mode'])


class Pairing(object):
    """perm[n] -> o, a bijection on range(N).
    """
    __slots__ = ('perm',)

    def __init__(self, perm):
        perm = check_permutation(perm)
        perm.flags.writeable = False
        object.__setattr__(self, 'perm', perm)

    def __setattr__(self, name, value):
        raise AttributeError('Pairing is immutable')

    def __len__(self):
        return self.perm.size

    def __eq__(self, other):
        if not isinstance(other, Pairing):
            return NotImplemented
        return np.array_equal(self.perm, other.perm)

    def __hash__(self):
        return hash(tuple(self.perm.tolist()))

    def __repr__(self):
        return 'Pairing({})'.format(tuple(self.perm.tolist()))

    def __reduce__(self):
        return (Pairing, (self.perm.tolist(),))

    def as_tuple(self):
        return tuple(self.perm.tolist())

    def compose(self, other):
        """n -> self.perm[other.perm[n]]: apply 'other' first.
        """
        if len(self) != len(other):
            raise ValueError('cannot compose pairings of sizes {} and {}'.format(len(self), len(other)))
        return Pairing(self.perm[other.perm])


def _descending(keys):
    """Indices sorted by key, largest first; ties keep index order.
    """
    return np.argsort(-np.asarray(keys, dtype=float), kind='stable')


def rank_match(sr_keys, ru_keys):
    """Pair the i-th largest S->R key with the i-th largest R->U key.

    >>> rank_match([3.0, 1.0], [2.0, 5.0])
    Pairing((1, 0))
    """
    if len(sr_keys) != len(ru_keys):
        raise ValueError('key lists differ in length')
    perm = np.empty(len(sr_keys), dtype=int)
    perm[_descending(sr_keys)] = _descending(ru_keys)
    return Pairing(perm)


def pair_default(N):
    """
    >>> pair_default(3)
    Pairing((0, 1, 2))
    """
    if N < 1:
        raise ValueError('N must be >= 1, not {!r}'.format(N))
    return Pairing(np.arange(N))


def pair_ordered(realization, assignment):
    """Strongest S->R with strongest winner gain, ignoring the eavesdropper.
    """
    return rank_match(realization.gain_sr, assignment.gain_rm)


def af_key(gain_rm, gain_re):
    return (gain_rm - gain_re) / np.sqrt(gain_rm * gain_re)


def pair_af(realization, assignment):
    return rank_match(realization.gain_sr, af_key(assignment.gain_rm, assignment.gain_re))


def pair_df(realization, assignment, budgets):
    """Return (Pairing, DfCase).
    If the relay budget binds, pair strong S->R subcarriers with the largest
    relay-hop SNR products (saves source energy); otherwise pair them with the
    largest winner/eavesdropper gain ratios.
    """
    gain_rm = np.asarray(assignment.gain_rm, dtype=float)
    gain_re = np.asarray(assignment.gain_re, dtype=float)
    s = realization.noise_variance
    relay = secure_waterfill(gain_rm, gain_re, budgets.P_R, s)
    products = relay.powers * gain_rm
    pairing = rank_match(realization.gain_sr, products)
    ps = products[pairing.perm] / realization.gain_sr
    if relay.degenerate or np.sum(ps) <= budgets.P_S:
        return pairing, DfCase(DfRegime.RELAY_LIMITED, 0.0, relay.level)
    pairing = rank_match(realization.gain_sr, gain_rm / gain_re)
    g_sr, g_rm, g_re = pair_gains(realization, assignment, pairing)
    source = secure_waterfill(g_sr, g_sr * g_re / g_rm, budgets.P_S, s)
    return pairing, DfCase(DfRegime.SOURCE_LIMITED, source.level, 0.0)


def _alternate_pairing(realization, assignment, budgets, kind):
    gain_rm = np.asarray(assignment.gain_rm, dtype=float)
    gain_re = np.asarray(assignment.gain_re, dtype=float)
    if kind is DfRegime.RELAY_LIMITED:
        relay = secure_waterfill(gain_rm, gain_re, budgets.P_R, realization.noise_variance)
        return rank_match(realization.gain_sr, relay.powers * gain_rm)
    return rank_match(realization.gain_sr, gain_rm / gain_re)


def optimize_df(realization, assignment, budgets):
    """Pair, solve, and re-pair once if the solver lands in another budget case.
    A source-limited pairing that solves as both-tight is retried with the
    relay-limited key.
    Return (Pairing, PowerAllocation, DfCase) of the better pass.
    """
    pairing, case = pair_df(realization, assignment, budgets)
    powers, solved = solve_df(realization, assignment, pairing, budgets)
    if solved.kind is case.kind:
        return pairing, powers, solved
    LOG.debug('DF case flipped from {} to {}; re-pairing once.'.format(case.kind.value, solved.kind.value))
    kind = solved.kind
    if kind is DfRegime.BOTH_TIGHT:
        kind = DfRegime.RELAY_LIMITED if case.kind is DfRegime.SOURCE_LIMITED else DfRegime.SOURCE_LIMITED
    other = _alternate_pairing(realization, assignment, budgets, kind)
    if other == pairing:
        return pairing, powers, solved
    other_powers, other_solved = solve_df(realization, assignment, other, budgets)
    first = sum_secure_rate(realization, assignment, pairing, powers, DF).sum
    second = sum_secure_rate(realization, assignment, other, other_powers, DF).sum
    if second > first:
        return other, other_powers, other_solved
    return pairing, powers, solved


def effective_gains(realization, assignment, pairing, mode):
    """High-SNR effective gain of each pair (n, perm[n]).
    """
    mode = check_mode(mode)
    g_sr, g_rm, g_re = pair_gains(realization, assignment, pairing)
    if mode == DF:
        value = (g_rm / g_re - 1.0) / g_sr
    else:
        value = (g_rm - g_re) / np.sqrt(g_sr * g_rm * g_re)
    return EffectiveGains(value, mode)


def gain_variance(gains):
    """Population variance.

    >>> gain_variance(EffectiveGains(np.array([1.0, 3.0]), 'df'))
    1.0
    """
    return float(np.var(np.asarray(gains.value, dtype=float)))


def all_pairings(N):
    """Every pairing of N subcarriers, in lexicographic order.
    """
    for perm in itertools.permutations(range(N)):
        yield Pairing(perm)


def waterfilled_two_gain_rate(g1, g2, P_S, noise):
    """Sum rate (bits) of plain water-filling P_S over two gains, both powered:
        log2[(noise (g1 + g2) + P_S g1 g2)**2 / (4 noise g1 g2)]
    """
    return math.log2((noise * (g1 + g2) + P_S * g1 * g2) ** 2 / (4.0 * noise * g1 * g2))


def waterfilled_two_gain_powers(g1, g2, P_S, noise):
    zeta = noise * (g1 - g2) / (2.0 * g1 * g2)
    return P_S / 2.0 + zeta, P_S / 2.0 - zeta


def widening_bound(g1, g2, delta, noise):
    """Source budget above which moving the gains apart by delta lowers the water-filled rate.
    """
    return noise * (g1 + g2) / math.sqrt(g1 * g2 * (g1 + delta) * (g2 - delta))


def swap_energy_delta(g1_sr, g2_sr, snr1, snr2):
    """Source energy of pairing (1->1, 2->2) minus that of (1->2, 2->1),
    when the relay-hop products snr_o = pr_o g_rm_o are fixed and equalized.
    Non-positive when the stronger S->R subcarrier carries the larger product.
    """
    straight = snr1 / g1_sr + snr2 / g2_sr
    crossed = snr2 / g1_sr + snr1 / g2_sr
    return straight - crossed
