"""Joint source/relay power allocation for amplify-and-forward relaying.

The sum secure rate is maximized subject to the source budget P_S and the
relay budget P_R. Stationarity (per powered subcarrier, rates in halved nats):

    lam = 1/2 a pr (b-c) / ((X + pr b)(X + pr c))
    mu  = 1/2 a ps (b-c) (s X - b c pr**2) / ((X + pr b)(X + pr c)(s + pr b)(s + pr c))

with a, b, c the S->R, winner and eavesdropper gains, s the noise variance
and X = s + a ps. The source budget is always active; the relay budget is
active only if the unconstrained optimum pr = Pr*(ps) overspends it. In that
case the best point may leave some pairs unpowered, and supports are compared.
"""
from .functional import (SolverError, bisect_decreasing, check_finite, BUDGET_RTOL)
from .rates import AF, af_nats, pair_gains
import collections
import itertools
import logging

import numpy as np

LOG = logging.getLogger(__name__)

Budgets = collections.namedtuple('Budgets', ['P_S', 'P_R'])
PowerAllocation = collections.namedtuple('PowerAllocation', ['ps', 'pr', 'lam', 'mu', 'mode'])
OperandHessian = collections.namedtuple('OperandHessian', ['d2_ps', 'd2_ps_pr', 'd2_pr', 'det'])

STATIONARITY_RTOL = 1e-6
MAX_ROUNDS = 200
FAST_ROUNDS = 8
EXHAUSTIVE_SUPPORT = 4
DROP_CANDIDATES = 2


def check_budgets(budgets):
    for (name, value) in zip(Budgets._fields, budgets):
        if not (np.isfinite(value) and value > 0):
            raise ValueError('budget {} must be finite and > 0, not {!r}'.format(name, value))
    return Budgets(float(budgets[0]), float(budgets[1]))


def optimal_relay_power(ps, g_sr, g_rm, g_re, noise):
    """Relay power that maximizes the AF secure rate for a given source power.

    >>> float(optimal_relay_power(0.0, 1.0, 1.0, 1.0, 1.0))
    1.0
    >>> float(optimal_relay_power(3.0, 1.0, 2.0, 2.0, 1.0))
    1.0
    """
    check_finite('optimal_relay_power', ps, g_sr, g_rm, g_re, noise)
    return np.sqrt((noise * noise + ps * g_sr * noise) / (g_rm * g_re))


def rate_gradient(ps, pr, a, b, c, s):
    """(d/dps, d/dpr) of the halved AF rate in nats.
    """
    x = s + a * ps
    xb = x + pr * b
    xc = x + pr * c
    d_ps = 0.5 * a * pr * (b - c) / (xb * xc)
    d_pr = 0.5 * a * ps * (b - c) * (s * x - b * c * pr * pr) / (xb * xc * (s + pr * b) * (s + pr * c))
    return d_ps, d_pr


def rate_hessian(ps, pr, a, b, c, s):
    """Second derivatives (ps/ps, ps/pr, pr/pr) of the halved AF rate in nats.
    """
    x = s + a * ps
    xb = x + pr * b
    xc = x + pr * c
    sb = s + pr * b
    sc = s + pr * c
    h_ss = 0.5 * a * a * (1.0 / (xb * xb) - 1.0 / (xc * xc))
    h_sr = 0.5 * a * (b / (xb * xb) - c / (xc * xc))
    h_rr = 0.5 * (-(b * b) / (sb * sb) + (c * c) / (sc * sc) - (c * c) / (xc * xc) + (b * b) / (xb * xb))
    return h_ss, h_sr, h_rr


def operand_hessian(ps, pr, a, b, c, s):
    """Closed-form Hessian of the rate operand
        O = (s + pr b)(X + pr c) / ((s + pr c)(X + pr b)),
    and its determinant. Negative semidefinite when
    b >= c, pr <= Pr*(ps) and pr*sqrt(b c) >= s.
    """
    A = a * ps
    x = s + A
    cs = c * pr + s
    bx = b * pr + x
    bc = b * c
    d2_ps = -2.0 * a * a * pr * (b - c) * (b * pr + s) / (cs * bx ** 3)
    d2_ps_pr = (a * (b - c) * (A * (bc * pr * pr + 2.0 * b * pr * s + s * s)
                               - (b * pr + s) * (bc * pr * pr - s * s))
                / (cs ** 2 * bx ** 3))
    d2_pr = (-2.0 * A * (b - c) * (bc * pr * (3.0 * s * x - bc * pr * pr) + s * x * (b * s + c * x))
             / (cs ** 3 * bx ** 3))
    det = (a * a * (b - c) ** 2
           * ((bc * pr * pr - s * s) * (-bc * pr * pr + 4.0 * A * s + s * s) + 4.0 * A * s * s * cs)
           / (cs ** 4 * bx ** 4))
    return OperandHessian(d2_ps, d2_ps_pr, d2_pr, det)


def stationarity_residuals(realization, assignment, pairing, powers):
    """Per pair: (dR/dps - lam, dR/dpr - mu), zero where the pair is unpowered.
    """
    a, b, c = pair_gains(realization, assignment, pairing)
    ps = np.asarray(powers.ps, dtype=float)
    pr = np.asarray(powers.pr, dtype=float)
    d_ps, d_pr = rate_gradient(ps, pr, a, b, c, realization.noise_variance)
    on = (ps > 0) & (pr > 0)
    return (np.where(on, d_ps - powers.lam, 0.0),
            np.where(on, d_pr - powers.mu, 0.0))


def _source_powers_on_relay_path(lam, a, b, c, s):
    """Source powers with pr = Pr*(ps) substituted into the source stationarity.
    With t = sqrt(X) and pr = k t, k = sqrt(s / (b c)), the condition becomes
        t (t + k b)(t + k c) = a k (b - c) / (2 lam),
    a cubic increasing in t > 0; solved by Newton from an upper bound.
    """
    k = np.sqrt(s / (b * c))
    q = 0.5 * a * k * (b - c) / lam
    kb = k * b
    kc = k * c
    t = np.minimum(np.cbrt(q), q / (kb * kc))
    for _ in range(100):
        f = t * (t + kb) * (t + kc) - q
        df = 3.0 * t * t + 2.0 * t * (kb + kc) + kb * kc
        t_new = t - f / df
        done = np.abs(t_new - t) <= 1e-15 * t
        t = t_new
        if np.all(done):
            break
    ps = np.maximum(t * t - s, 0.0) / a
    return ps


def _phase1(a, b, c, s, P_S):
    """Relay budget slack (mu = 0). Return (ps, pr, lam).
    """
    k = np.sqrt(s / (b * c))
    t0 = np.sqrt(s)
    lam_hi = float(np.max(0.5 * a * k * (b - c) / (t0 * (t0 + k * b) * (t0 + k * c))))
    lam, total = bisect_decreasing(
        lambda lam: float(np.sum(_source_powers_on_relay_path(lam, a, b, c, s))),
        P_S, lam_hi * 1e-12, lam_hi, name='source multiplier (relay slack)')
    ps = _source_powers_on_relay_path(lam, a, b, c, s)
    pr = np.where(ps > 0, np.sqrt((s * s + ps * a * s) / (b * c)), 0.0)
    return ps, pr, lam


def _source_step(pr, a, b, c, s, P_S):
    """Best source powers for fixed relay powers; closed form per lam.
    """
    def powers(lam):
        k = a * pr * (b - c) / (2.0 * lam)
        num = 2.0 * (k - pr * pr * b * c)
        den = pr * (b + c) + np.sqrt(pr * pr * (b - c) ** 2 + 4.0 * k)
        with np.errstate(invalid='ignore', divide='ignore'):
            x = np.where(den > 0, num / den, 0.0)
        return np.where(pr > 0, np.maximum(x - s, 0.0) / a, 0.0)
    lam_hi = float(np.max(0.5 * a * pr * (b - c) / ((s + pr * b) * (s + pr * c))))
    if lam_hi <= 0:
        raise SolverError('No relay power on any subcarrier; source step is undefined.',
                {'sum_pr': float(np.sum(pr))})
    lam, _ = bisect_decreasing(lambda lam: float(np.sum(powers(lam))), P_S,
            lam_hi * 1e-12, lam_hi, name='source multiplier')
    return powers(lam), lam


def _relay_powers(mu, ps, a, b, c, s):
    """Root of dR/dpr = mu in [0, Pr*(ps)] per subcarrier; 0 where the marginal at pr=0 is below mu.
    dR/dpr is decreasing on that interval; safeguarded Newton with the exact second derivative.
    """
    x = s + a * ps
    d0 = np.where(ps > 0, 0.5 * a * ps * (b - c) / (x * s), 0.0)
    on = d0 > mu
    pr = np.zeros_like(ps)
    if not np.any(on):
        return pr
    a_, b_, c_, ps_ = a[on], b[on], c[on], ps[on]
    lo = np.zeros_like(ps_)
    hi = np.sqrt(s * (s + a_ * ps_) / (b_ * c_))
    r = 0.5 * (lo + hi)
    for _ in range(100):
        g = rate_gradient(ps_, r, a_, b_, c_, s)[1] - mu
        pos = g > 0
        lo = np.where(pos, r, lo)
        hi = np.where(pos, hi, r)
        dg = rate_hessian(ps_, r, a_, b_, c_, s)[2]
        with np.errstate(invalid='ignore', divide='ignore'):
            step = r - g / dg
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi) | (dg >= 0)
        r_new = np.where(bad, 0.5 * (lo + hi), step)
        r_new = np.where(g == 0, r, r_new)
        done = np.abs(r_new - r) <= 1e-15 * np.maximum(r, 1e-300)
        r = r_new
        if np.all(done):
            break
    pr[on] = r
    return pr


def _relay_step(ps, a, b, c, s, P_R):
    x = s + a * ps
    pr_star = np.where(ps > 0, np.sqrt(s * x / (b * c)), 0.0)
    if np.sum(pr_star) <= P_R:
        return pr_star, 0.0
    mu_hi = float(np.max(np.where(ps > 0, 0.5 * a * ps * (b - c) / (x * s), 0.0)))
    if mu_hi <= 0:
        raise SolverError('No source power on any subcarrier; relay step is undefined.',
                {'sum_ps': float(np.sum(ps))})
    mu, _ = bisect_decreasing(lambda mu: float(np.sum(_relay_powers(mu, ps, a, b, c, s))), P_R,
            mu_hi * 1e-12, mu_hi, name='relay multiplier')
    return _relay_powers(mu, ps, a, b, c, s), mu


def _kkt_scale(lam, mu):
    return max(lam, mu, 1.0)


def kkt_violation(ps, pr, lam, mu, a, b, c, s, budgets, relay_tight):
    """Largest scaled residual: stationarity on powered pairs and active budget rows.
    """
    d_ps, d_pr = rate_gradient(ps, pr, a, b, c, s)
    on = (ps > 0) & (pr > 0)
    scale = _kkt_scale(lam, mu)
    worst = 0.0
    if np.any(on):
        worst = float(np.max(np.abs(d_ps[on] - lam))) / scale
        worst = max(worst, float(np.max(np.abs(d_pr[on] - mu))) / scale)
    worst = max(worst, abs(float(np.sum(ps)) - budgets.P_S) / budgets.P_S)
    if relay_tight:
        worst = max(worst, abs(float(np.sum(pr)) - budgets.P_R) / budgets.P_R)
    return worst


def _newton_polish(ps, pr, lam, mu, a, b, c, s, budgets, relay_tight, max_iter=50):
    """Damped Newton on the KKT system of the powered pairs.
    Unknowns: ps, pr of the powered pairs, lam, and mu if the relay budget is tight.
    Return (ps, pr, lam, mu) or None if the iteration cannot make progress.
    """
    idx = np.flatnonzero((ps > 0) & (pr > 0))
    k = idx.size
    if k == 0:
        return None
    a_, b_, c_ = a[idx], b[idx], c[idx]
    xs = ps[idx].copy()
    xr = pr[idx].copy()
    m = 2 * k + (2 if relay_tight else 1)
    weights = np.concatenate([np.full(2 * k, 1.0 / _kkt_scale(lam, mu)),
                              [1.0 / budgets.P_S], [1.0 / budgets.P_R] if relay_tight else []])

    def residual(xs, xr, lam, mu):
        d_ps, d_pr = rate_gradient(xs, xr, a_, b_, c_, s)
        parts = [d_ps - lam, d_pr - mu, [xs.sum() - budgets.P_S]]
        if relay_tight:
            parts.append([xr.sum() - budgets.P_R])
        return np.concatenate(parts)

    i = np.arange(k)
    F = residual(xs, xr, lam, mu)
    merit = np.linalg.norm(F * weights)
    for _ in range(max_iter):
        if merit <= 1e-14:
            break
        h_ss, h_sr, h_rr = rate_hessian(xs, xr, a_, b_, c_, s)
        J = np.zeros((m, m))
        J[i, i] = h_ss
        J[i, k + i] = h_sr
        J[i, 2 * k] = -1.0
        J[k + i, i] = h_sr
        J[k + i, k + i] = h_rr
        J[2 * k, :k] = 1.0
        if relay_tight:
            J[k + i, 2 * k + 1] = -1.0
            J[2 * k + 1, k:2 * k] = 1.0
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            LOG.debug('Singular KKT Jacobian; polish abandoned.')
            return None
        t = 1.0
        for _ in range(40):
            ys = xs + t * step[:k]
            yr = xr + t * step[k:2 * k]
            ylam = lam + t * step[2 * k]
            ymu = mu + t * step[2 * k + 1] if relay_tight else mu
            if np.all(ys > 0) and np.all(yr > 0) and ylam > 0 and ymu >= 0:
                G = residual(ys, yr, ylam, ymu)
                g_merit = np.linalg.norm(G * weights)
                if g_merit < merit:
                    break
            t *= 0.5
        else:
            break
        xs, xr, lam, mu, F, merit = ys, yr, ylam, ymu, G, g_merit
    out_ps = np.zeros_like(ps)
    out_pr = np.zeros_like(pr)
    out_ps[idx] = xs
    out_pr[idx] = xr
    return out_ps, out_pr, lam, mu


def _phase2(ps, a, b, c, s, budgets):
    """Relay budget tight (mu > 0). Alternate the two one-dimensional multiplier
    searches from the relay-slack source allocation, then polish with Newton.
    Return ((ps, pr, lam, mu), kkt violation) of the best iterate.
    """
    best = None
    pr = np.zeros_like(ps)
    lam = mu = 0.0
    for rounds in range(1, MAX_ROUNDS + 1):
        pr_new, mu = _relay_step(ps, a, b, c, s, budgets.P_R)
        ps_new, lam = _source_step(pr_new, a, b, c, s, budgets.P_S)
        change = max(np.max(np.abs(ps_new - ps)) / budgets.P_S,
                     np.max(np.abs(pr_new - pr)) / budgets.P_R)
        ps, pr = ps_new, pr_new
        if rounds >= FAST_ROUNDS or change <= 1e-12:
            polished = _newton_polish(ps, pr, lam, mu, a, b, c, s, budgets, True)
            if polished is not None:
                viol = kkt_violation(*polished, a, b, c, s, budgets, True)
                if viol <= 1e-9:
                    LOG.debug('Relay-tight KKT point after {} rounds + Newton (violation {:.2g}).'.format(rounds, viol))
                    return polished, viol
                best = (polished, viol)
            if change <= 1e-12:
                break
    viol = kkt_violation(ps, pr, lam, mu, a, b, c, s, budgets, True)
    candidates = [((ps, pr, lam, mu), viol)] + ([best] if best else [])
    return min(candidates, key=lambda cv: cv[1])


def _single_pair_tight(a, b, c, s, budgets):
    ps = np.array([budgets.P_S])
    pr = np.array([budgets.P_R])
    d_ps, d_pr = rate_gradient(ps, pr, a, b, c, s)
    return ps, pr, float(d_ps[0]), float(d_pr[0])


def _solve_support(a, b, c, s, budgets):
    """KKT point with every given pair eligible for power. Return (ps, pr, lam, mu).

    A relay-tight search that starves a pair (its ps goes to 0 and mu with it)
    or does not converge drops the pair with the least source power; the
    remaining pairs are solved again from phase 1.
    """
    keep = np.arange(a.size)
    while True:
        a_, b_, c_ = a[keep], b[keep], c[keep]
        ps, pr, lam = _phase1(a_, b_, c_, s, budgets.P_S)
        mu = 0.0
        if np.sum(pr) > budgets.P_R * (1.0 + BUDGET_RTOL):
            if keep.size == 1:
                ps, pr, lam, mu = _single_pair_tight(a_, b_, c_, s, budgets)
            else:
                try:
                    (ps2, pr2, lam2, mu2), viol = _phase2(ps, a_, b_, c_, s, budgets)
                except SolverError as e:
                    LOG.debug('Relay-tight search failed on {} pairs: {}'.format(keep.size, e))
                    (ps2, pr2, lam2, mu2), viol = (ps, pr, lam, 0.0), float('inf')
                if viol > STATIONARITY_RTOL or not mu2 > 0.0:
                    drop = int(np.argmin(ps2))
                    LOG.debug('Dropping pair {} (ps={:.3g}, mu={:.3g}, violation {:.2g}).'.format(
                        keep[drop], ps2[drop], mu2, viol))
                    keep = np.delete(keep, drop)
                    continue
                ps, pr, lam, mu = ps2, pr2, lam2, mu2
        out_ps = np.zeros(a.size)
        out_pr = np.zeros(a.size)
        out_ps[keep] = ps
        out_pr[keep] = pr
        return out_ps, out_pr, lam, mu


def _nats(ps, pr, a, b, c, s):
    return float(np.sum(np.maximum(af_nats(ps, pr, a, b, c, s), 0.0)))


def _solve_subset(subset, a, b, c, s, budgets):
    """_solve_support on a subset of the pairs, scattered back to all of them.
    """
    ps_, pr_, lam, mu = _solve_support(a[subset], b[subset], c[subset], s, budgets)
    ps = np.zeros(a.size)
    pr = np.zeros(a.size)
    ps[subset] = ps_
    pr[subset] = pr_
    return ps, pr, lam, mu


def _supports(n):
    """Proper non-empty subsets of range(n), largest first.
    """
    for k in range(n - 1, 0, -1):
        for subset in itertools.combinations(range(n), k):
            yield np.array(subset)


def _search_supports(a, b, c, s, budgets):
    """Relay-tight only. Every pair is stationary at ps = pr = 0, so the KKT
    point with all pairs eligible need not be the best one. Small sets try
    every support; larger ones drop the weakest powered pairs while the rate improves.
    Ties keep the larger support.
    """
    best = _solve_subset(np.arange(a.size), a, b, c, s, budgets)
    best_rate = _nats(best[0], best[1], a, b, c, s)

    def consider(subset):
        nonlocal best, best_rate
        try:
            found = _solve_subset(subset, a, b, c, s, budgets)
        except SolverError as e:
            LOG.debug('Support {} skipped: {}'.format(subset.tolist(), e))
            return False
        rate = _nats(found[0], found[1], a, b, c, s)
        if rate <= best_rate * (1.0 + 1e-12):
            return False
        LOG.debug('Support {} wins: {:.10g} > {:.10g} nats.'.format(subset.tolist(), rate, best_rate))
        best, best_rate = found, rate
        return True

    if a.size <= EXHAUSTIVE_SUPPORT:
        for subset in _supports(a.size):
            consider(subset)
        return best
    while True:
        powered = np.flatnonzero(best[0] > 0)
        if powered.size <= 1:
            return best
        contributions = af_nats(best[0][powered], best[1][powered], a[powered], b[powered], c[powered], s)
        weakest = np.argsort(contributions, kind='stable')[:DROP_CANDIDATES]
        better = [consider(np.delete(powered, i)) for i in weakest]
        if not any(better):
            return best


def solve_af_gains(g_sr, g_rm, g_re, noise, budgets):
    """Power allocation for per-pair gains (already paired). Return PowerAllocation.
    """
    budgets = check_budgets(budgets)
    g_sr = np.asarray(g_sr, dtype=float)
    g_rm = np.asarray(g_rm, dtype=float)
    g_re = np.asarray(g_re, dtype=float)
    N = g_sr.size
    ps = np.zeros(N)
    pr = np.zeros(N)
    active = g_rm > g_re
    if not np.any(active):
        LOG.warning('No subcarrier has a secure margin; allocating no power.')
        return PowerAllocation(ps, pr, 0.0, 0.0, AF)
    a, b, c = g_sr[active], g_rm[active], g_re[active]
    s = noise
    ps_a, pr_a, lam = _phase1(a, b, c, s, budgets.P_S)
    mu = 0.0
    if np.sum(pr_a) > budgets.P_R * (1.0 + BUDGET_RTOL):
        LOG.debug('Relay budget tight: sum Pr*={:.6g} > P_R={:.6g}'.format(np.sum(pr_a), budgets.P_R))
        ps_a, pr_a, lam, mu = _search_supports(a, b, c, s, budgets)
    else:
        LOG.debug('Relay budget slack: sum Pr*={:.6g} <= P_R={:.6g}'.format(np.sum(pr_a), budgets.P_R))
    ps[active] = ps_a
    pr[active] = pr_a
    return PowerAllocation(ps, pr, float(lam), float(mu), AF)


def solve_af(realization, assignment, pairing, budgets):
    g_sr, g_rm, g_re = pair_gains(realization, assignment, pairing)
    return solve_af_gains(g_sr, g_rm, g_re, realization.noise_variance, budgets)
