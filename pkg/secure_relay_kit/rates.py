"""Secure rates for the two-slot relay link, in bits per OFDM symbol.
Internals work in nats; conversion to bits happens at the public boundary.
Each subcarrier rate is clamped at zero on its own.
"""
from .functional import check_finite, check_permutation
import collections
import logging
import math

import numpy as np

LOG = logging.getLogger(__name__)

AF = 'af'
DF = 'df'
MODES = (AF, DF)
LN2 = math.log(2.0)

RateReport = collections.namedtuple('RateReport', ['per_subcarrier', 'sum', 'mode'])


def check_mode(mode):
    mode = str(mode).lower()
    if mode not in MODES:
        raise ValueError('mode must be one of {}, not {!r}'.format(MODES, mode))
    return mode


def af_nats(ps, pr, g_sr, g_rm, g_re, noise):
    """Unclamped AF rate in nats, already halved. No input checks.
    """
    x = noise + ps * g_sr
    return 0.5 * (np.log1p(pr * g_rm / noise) + np.log(x + pr * g_re)
                  - np.log1p(pr * g_re / noise) - np.log(x + pr * g_rm))


def df_nats(ps, pr, g_sr, g_rm, g_re, noise):
    """Unclamped DF rate in nats, already halved. No input checks.
    """
    hop = np.minimum(ps * g_sr, pr * g_rm)
    return 0.5 * (np.log1p(hop / noise) - np.log1p(pr * g_re / noise))


def _check(name, ps, pr, g_sr, g_rm, g_re, noise):
    check_finite(name, ps, pr, g_sr, g_rm, g_re, noise)
    if np.any(np.asarray(ps) < 0) or np.any(np.asarray(pr) < 0):
        raise ValueError('{}: powers must be >= 0'.format(name))
    if np.any(np.asarray(g_sr) <= 0) or np.any(np.asarray(g_rm) <= 0) or np.any(np.asarray(g_re) <= 0):
        raise ValueError('{}: gains must be > 0'.format(name))
    if not noise > 0:
        raise ValueError('{}: noise variance must be > 0'.format(name))


def _bits(nats):
    bits = np.maximum(nats, 0.0) / LN2
    if np.ndim(bits) == 0:
        return float(bits)
    return bits


def secure_rate_af(ps, pr, g_sr, g_rm, g_re, noise):
    """
    >>> secure_rate_af(2.0, 1.0, 4.0, 3.0, 3.0, 1.0)
    0.0
    >>> secure_rate_af(2.0, 0.0, 4.0, 3.0, 1.0, 1.0)
    0.0
    """
    _check('secure_rate_af', ps, pr, g_sr, g_rm, g_re, noise)
    return _bits(af_nats(ps, pr, g_sr, g_rm, g_re, noise))


def secure_rate_df(ps, pr, g_sr, g_rm, g_re, noise):
    """
    >>> abs(secure_rate_df(1.0, 1.0, 2.0, 4.0, 1.0, 1.0) - 0.5 * (math.log2(3) - 1)) < 1e-12
    True
    """
    _check('secure_rate_df', ps, pr, g_sr, g_rm, g_re, noise)
    return _bits(df_nats(ps, pr, g_sr, g_rm, g_re, noise))


def pair_gains(realization, assignment, pairing):
    """Per pair n: (g_sr[n], g_rm[perm[n]], g_re[perm[n]]).
    """
    N = realization.num_subcarriers
    perm = check_permutation(getattr(pairing, 'perm', pairing), N)
    return (np.asarray(realization.gain_sr, dtype=float),
            np.asarray(assignment.gain_rm, dtype=float)[perm],
            np.asarray(assignment.gain_re, dtype=float)[perm])


def sum_secure_rate(realization, assignment, pairing, powers, mode):
    """RateReport for pairs (n, perm[n]); per_subcarrier is indexed by n.
    'powers' needs .ps and .pr, each of length N.
    """
    mode = check_mode(mode)
    g_sr, g_rm, g_re = pair_gains(realization, assignment, pairing)
    ps = np.asarray(powers.ps, dtype=float)
    pr = np.asarray(powers.pr, dtype=float)
    if ps.shape != g_sr.shape or pr.shape != g_sr.shape:
        raise ValueError('powers must have {} entries, got ps={} pr={}'.format(g_sr.size, ps.shape, pr.shape))
    rate = secure_rate_af if mode == AF else secure_rate_df
    per = np.atleast_1d(rate(ps, pr, g_sr, g_rm, g_re, realization.noise_variance))
    return RateReport(per_subcarrier=per, sum=math.fsum(per), mode=mode)
