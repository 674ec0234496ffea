"""Decode-and-forward power allocation.

Optimal powers equalize the two hops of each pair (ps g_sr = pr g_rm), which
reduces the problem to secure water-filling on one hop. Which hop depends on
the budgets:

  RELAY_LIMITED   water-fill the relay hop with P_R; source follows.
  SOURCE_LIMITED  water-fill the source hop with P_S and the effective
                  eavesdropper gain g_sr g_re / g_rm; relay follows.
  BOTH_TIGHT      nested bisection, lam outer and mu inner.
"""
from .functional import SolverError, bisect_decreasing, check_finite, BUDGET_RTOL
from .power_af import Budgets, PowerAllocation, check_budgets
from .rates import DF, pair_gains
import collections
import enum
import logging

import numpy as np

LOG = logging.getLogger(__name__)

WaterLevel = collections.namedtuple('WaterLevel', ['powers', 'level', 'degenerate'])


class DfRegime(enum.Enum):
    RELAY_LIMITED = 'relay-limited'
    SOURCE_LIMITED = 'source-limited'
    BOTH_TIGHT = 'both-tight'


DfCase = collections.namedtuple('DfCase', ['kind', 'lam', 'mu'])


def secure_powers(level, g_m, g_e, noise):
    """Positive root p of  noise (g_m - g_e) = 2 level (noise + p g_m)(noise + p g_e),
    clamped at 0.

    >>> p = secure_powers(0.25, np.array([1.0]), np.array([0.0]), 1.0)
    >>> float(p[0])
    1.0
    """
    g_m = np.asarray(g_m, dtype=float)
    g_e = np.asarray(g_e, dtype=float)
    A = g_m * g_e
    B = noise * (g_m + g_e)
    C = noise * noise - noise * (g_m - g_e) / (2.0 * level)
    disc = np.maximum(B * B - 4.0 * A * C, 0.0)
    with np.errstate(invalid='ignore', divide='ignore'):
        p = np.where(C < 0, -2.0 * C / (B + np.sqrt(disc)), 0.0)
    return np.where(g_m > g_e, p, 0.0)


def secure_waterfill(g_m, g_e, budget, noise):
    """Spread 'budget' over entries to maximize sum 1/2 log((noise + p g_m) / (noise + p g_e)).
    Return WaterLevel(powers, level, degenerate); 'level' is the multiplier.
    """
    g_m = np.atleast_1d(np.asarray(g_m, dtype=float))
    g_e = np.atleast_1d(np.asarray(g_e, dtype=float))
    check_finite('secure_waterfill', g_m, g_e, budget, noise)
    if g_m.shape != g_e.shape:
        raise ValueError('gain vectors differ in shape: {} vs {}'.format(g_m.shape, g_e.shape))
    if not budget > 0:
        raise ValueError('budget must be > 0, not {!r}'.format(budget))
    if np.any(g_e < 0):
        raise ValueError('eavesdropper gains must be >= 0')
    good = g_m > g_e
    if not np.any(good):
        LOG.warning('Secure water-filling: all {} entries degenerate; no power allocated.'.format(g_m.size))
        return WaterLevel(np.zeros_like(g_m), 0.0, True)
    # Above this level every root is negative.
    level_hi = float(np.max(np.where(good, (g_m - g_e) / (2.0 * noise), 0.0)))
    level, _ = bisect_decreasing(lambda lv: float(np.sum(secure_powers(lv, g_m, g_e, noise))),
            budget, level_hi * 1e-12, level_hi, name='water level')
    return WaterLevel(secure_powers(level, g_m, g_e, noise), level, False)


def _both_tight(a, b, c, s, budgets, lam_hi):
    """Each pair sees the combined multiplier mu + lam b / a.
    Outer bisection on lam drives sum(ps) to P_S; inner bisection on mu drives sum(pr) to P_R.
    """
    def relay_powers(lam):
        base = lam * b / a
        def total(mu):
            return float(np.sum(secure_powers(mu + base, b, c, s)))
        if total(0.0) <= budgets.P_R:
            return secure_powers(base, b, c, s), 0.0
        mu_hi = float(np.max((b - c) / (2.0 * s)))
        mu, _ = bisect_decreasing(total, budgets.P_R, mu_hi * 1e-12, mu_hi, name='relay multiplier')
        return secure_powers(mu + base, b, c, s), mu

    def source_total(lam):
        pr, _ = relay_powers(lam)
        return float(np.sum(pr * b / a))

    lam, _ = bisect_decreasing(source_total, budgets.P_S, lam_hi * 1e-12, lam_hi,
            name='source multiplier')
    pr, mu = relay_powers(lam)
    return pr, lam, mu


def solve_df_gains(g_sr, g_rm, g_re, noise, budgets):
    """Power allocation for per-pair gains. Return (PowerAllocation, DfCase).
    """
    budgets = check_budgets(budgets)
    g_sr = np.asarray(g_sr, dtype=float)
    g_rm = np.asarray(g_rm, dtype=float)
    g_re = np.asarray(g_re, dtype=float)
    s = noise
    relay = secure_waterfill(g_rm, g_re, budgets.P_R, s)
    pr = relay.powers
    ps = pr * g_rm / g_sr
    if relay.degenerate:
        return PowerAllocation(ps, pr, 0.0, 0.0, DF), DfCase(DfRegime.RELAY_LIMITED, 0.0, 0.0)
    if np.sum(ps) <= budgets.P_S * (1.0 + BUDGET_RTOL):
        LOG.debug('DF relay-limited: sum ps={:.6g} <= P_S={:.6g}'.format(np.sum(ps), budgets.P_S))
        return (PowerAllocation(ps, pr, 0.0, relay.level, DF),
                DfCase(DfRegime.RELAY_LIMITED, 0.0, relay.level))
    g_sr_eav = g_sr * g_re / g_rm
    source = secure_waterfill(g_sr, g_sr_eav, budgets.P_S, s)
    ps = source.powers
    pr = ps * g_sr / g_rm
    if np.sum(pr) <= budgets.P_R * (1.0 + BUDGET_RTOL):
        LOG.debug('DF source-limited: sum pr={:.6g} <= P_R={:.6g}'.format(np.sum(pr), budgets.P_R))
        return (PowerAllocation(ps, pr, source.level, 0.0, DF),
                DfCase(DfRegime.SOURCE_LIMITED, source.level, 0.0))
    LOG.debug('DF both budgets tight.')
    good = g_rm > g_re
    pr = np.zeros_like(g_sr)
    pr_good, lam, mu = _both_tight(g_sr[good], g_rm[good], g_re[good], s, budgets, source.level)
    pr[good] = pr_good
    ps = pr * g_rm / g_sr
    return PowerAllocation(ps, pr, lam, mu, DF), DfCase(DfRegime.BOTH_TIGHT, lam, mu)


def solve_df(realization, assignment, pairing, budgets):
    g_sr, g_rm, g_re = pair_gains(realization, assignment, pairing)
    return solve_df_gains(g_sr, g_rm, g_re, realization.noise_variance, budgets)


def df_stationarity_residuals(realization, assignment, pairing, powers):
    """Per pair: marginal relay-hop rate minus (mu + lam g_rm / g_sr), zero where unpowered.
    """
    a, b, c = pair_gains(realization, assignment, pairing)
    s = realization.noise_variance
    pr = np.asarray(powers.pr, dtype=float)
    marginal = s * (b - c) / (2.0 * (s + pr * b) * (s + pr * c))
    return np.where(pr > 0, marginal - (powers.mu + powers.lam * b / a), 0.0)
