"""Purely functional code.
"""

import logging
import math

import numpy as np

LOG = logging.getLogger(__name__)

BUDGET_RTOL = 1e-8
MAX_BISECTION = 200


class SolverError(Exception):
    """A multiplier search or root find did not converge.
    'residuals' maps names to the offending values.
    """
    def __init__(self, msg, residuals=None):
        super(SolverError, self).__init__(msg)
        self.residuals = dict(residuals or {})

    def __str__(self):
        msg = super(SolverError, self).__str__()
        if self.residuals:
            msg += ' ' + ', '.join('{}={:.3g}'.format(k, v) for (k, v) in sorted(self.residuals.items()))
        return msg


def db_to_linear(db):
    """
    >>> db_to_linear(0)
    1.0
    >>> db_to_linear(10)
    10.0
    """
    return float(10.0 ** (float(db) / 10.0))


def linear_to_db(x):
    """
    >>> linear_to_db(100.0)
    20.0
    """
    return float(10.0 * math.log10(x))


def bisect_decreasing(f, target, lo, hi, ftol=1e-13, xtol=1e-15, max_iter=MAX_BISECTION, name='multiplier'):
    """Find x > 0 with f(x) == target, for f non-increasing.
    The search is geometric (bisection in log x), since multipliers span many decades.
    The bracket [lo, hi] is widened by factors of 4 if it does not straddle the target.
    Return (x, f(x)). Raise SolverError if the target is not met to BUDGET_RTOL.

    >>> x, fx = bisect_decreasing(lambda x: 1.0 / x, 4.0, 1.0, 2.0)
    >>> abs(x - 0.25) < 1e-12
    True
    """
    assert 0 < lo <= hi, (lo, hi)
    scale = max(abs(target), 1e-300)
    flo = f(lo)
    for _ in range(max_iter):
        if flo >= target:
            break
        lo /= 4.0
        flo = f(lo)
    else:
        raise SolverError('Could not bracket {} from below.'.format(name),
                {'lo': lo, 'f_lo': flo, 'target': target})
    fhi = f(hi)
    for _ in range(max_iter):
        if fhi <= target:
            break
        hi *= 4.0
        fhi = f(hi)
    else:
        raise SolverError('Could not bracket {} from above.'.format(name),
                {'hi': hi, 'f_hi': fhi, 'target': target})
    best = (lo, flo) if abs(flo - target) <= abs(fhi - target) else (hi, fhi)
    for i in range(max_iter):
        if abs(best[1] - target) <= ftol * scale:
            break
        if hi / lo - 1.0 <= xtol:
            break
        mid = math.sqrt(lo * hi)
        fmid = f(mid)
        if abs(fmid - target) < abs(best[1] - target):
            best = (mid, fmid)
        if fmid > target:
            lo = mid
        else:
            hi = mid
    if abs(best[1] - target) > BUDGET_RTOL * scale:
        raise SolverError('Bisection on {} stalled after {} iterations.'.format(name, i + 1),
                {'x': best[0], 'f': best[1], 'target': target})
    return best


def compensated_mean(values):
    """Order-independent mean, via exactly rounded summation.

    >>> compensated_mean([0.1] * 10)
    0.1
    >>> compensated_mean([])
    0.0
    """
    values = list(values)
    if not values:
        return 0.0
    return math.fsum(values) / len(values)


def std_error(values):
    """Standard error of the mean (sample std, ddof=1). Zero for fewer than 2 values.

    >>> std_error([1.0])
    0.0
    >>> round(std_error([1.0, 3.0]), 6)
    1.0
    """
    values = list(values)
    n = len(values)
    if n < 2:
        return 0.0
    mean = compensated_mean(values)
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return math.sqrt(var / n)


def parse_floats(text):
    """Comma- or space-separated floats.

    >>> parse_floats('0, 3,6')
    [0.0, 3.0, 6.0]
    >>> parse_floats([1, 2])
    [1.0, 2.0]
    """
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in text.replace(',', ' ').split()]


def check_finite(name, *arrays):
    for a in arrays:
        a = np.asarray(a, dtype=float)
        if not np.all(np.isfinite(a)):
            raise ValueError('{}: non-finite input {!r}'.format(name, a))


def cfg_tobool(v):
    """
    >>> cfg_tobool('yes')
    True
    >>> cfg_tobool('true')
    True
    >>> cfg_tobool('T')
    True
    >>> cfg_tobool('1')
    True
    >>> cfg_tobool('no')
    False
    >>> cfg_tobool('false')
    False
    >>> cfg_tobool('F')
    False
    >>> cfg_tobool('0')
    False
    >>> cfg_tobool('')
    False
    """
    if v in (True, False, None):
        return v
    if not v:
        return False
    if v.upper()[0] in ('T', 'Y'):
        return True
    if v.upper()[0] in ('F', 'N'):
        return False
    return bool(int(v))


def check_permutation(perm, n=None):
    """Return perm as an int array, or raise ValueError.

    >>> check_permutation([1, 0]).tolist()
    [1, 0]
    """
    perm = np.asarray(perm)
    if perm.ndim != 1 or (n is not None and perm.size != n):
        raise ValueError('pairing must be a permutation of {} subcarriers, got {!r}'.format(n, perm))
    if perm.size and not np.issubdtype(perm.dtype, np.integer):
        raise ValueError('pairing entries must be integers, got {!r}'.format(perm))
    if not np.array_equal(np.sort(perm), np.arange(perm.size)):
        raise ValueError('not a permutation: {!r}'.format(perm.tolist()))
    return perm.astype(int)
