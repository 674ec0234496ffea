"""Brute-force references for small instances.

brute_force_scp tries every pairing; solve_power_bruteforce searches the
power simplices directly, without using any stationarity condition.
Both exist to certify the fast paths.
"""
from . import multiproc
from .functional import SolverError
from .pairing import Pairing, all_pairings
from .power_af import PowerAllocation, check_budgets, solve_af_gains
from .power_df import solve_df_gains
from .rates import AF, DF, LN2, check_mode, pair_gains
import collections
import logging
import math

import numpy as np

LOG = logging.getLogger(__name__)

OracleResult = collections.namedtuple('OracleResult', ['best_pairing', 'best_powers', 'best_rate', 'evaluations'])

MAX_PAIRING_N = 8
MAX_POWER_N = 4
MIN_GRID_RESOLUTION = 4
MIN_STARTS = 8


def solve_gains(g_sr, g_rm, g_re, noise, budgets, mode):
    """Fast-path powers for already-paired gains.
    """
    if mode == AF:
        return solve_af_gains(g_sr, g_rm, g_re, noise, budgets)
    return solve_df_gains(g_sr, g_rm, g_re, noise, budgets)[0]


def _sum_bits(g_sr, g_rm, g_re, noise, powers, mode):
    return _objective(mode, list(zip(g_sr, g_rm, g_re)), noise)(list(powers.ps), list(powers.pr)) / LN2


def _evaluate(args):
    (realization, assignment, perm, budgets, mode) = args
    g_sr, g_rm, g_re = pair_gains(realization, assignment, perm)
    try:
        powers = solve_gains(g_sr, g_rm, g_re, realization.noise_variance, budgets, mode)
    except SolverError as e:
        LOG.warning('Pairing {}: {}'.format(perm, e))
        return perm, None, -1.0
    return perm, powers, _sum_bits(g_sr, g_rm, g_re, realization.noise_variance, powers, mode)


def brute_force_scp(realization, assignment, budgets, mode, n_core=0):
    """Optimal pairing by enumeration of all N! pairings, each optimally powered.
    Ties keep the lexicographically smallest pairing.
    Raise SolverError if any pairing cannot be powered.
    """
    mode = check_mode(mode)
    budgets = check_budgets(budgets)
    N = realization.num_subcarriers
    if N > MAX_PAIRING_N:
        raise ValueError('brute-force pairing is limited to N <= {}, not {}'.format(MAX_PAIRING_N, N))
    jobs = [(realization, assignment, p.perm, budgets, mode) for p in all_pairings(N)]
    with multiproc.Pool(n_core) as pool:
        results = pool.map(_evaluate, jobs)
    failed = [perm for (perm, powers, _) in results if powers is None]
    if failed:
        raise SolverError('Enumeration incomplete: {} of {} pairings failed, first {}.'.format(
            len(failed), len(jobs), failed[0]), {'failed': len(failed)})
    best = None
    for (perm, powers, rate) in results:
        if best is None or rate > best[2] + 1e-12 * max(1.0, best[2]):
            best = (perm, powers, rate)
    return OracleResult(Pairing(best[0]), best[1], best[2], len(jobs))


def _objective(mode, pairs, s):
    """Clamped sum rate in halved nats; plain floats for speed in the grid stage.
    """
    log1p = math.log1p
    log = math.log
    if mode == AF:
        def f(ps, pr):
            total = 0.0
            for (p_s, p_r, (a, b, c)) in zip(ps, pr, pairs):
                x = s + p_s * a
                v = log1p(p_r * b / s) + log(x + p_r * c) - log1p(p_r * c / s) - log(x + p_r * b)
                if v > 0.0:
                    total += v
            return 0.5 * total
    else:
        def f(ps, pr):
            total = 0.0
            for (p_s, p_r, (a, b, c)) in zip(ps, pr, pairs):
                v = log1p(min(p_s * a, p_r * b) / s) - log1p(p_r * c / s)
                if v > 0.0:
                    total += v
            return 0.5 * total
    return f


def _transfer_ascent(f, ps, pr, budgets, resolution, min_step, path):
    """Move quanta between buckets (last bucket of each budget is unused power)
    while the rate improves; halve the quantum when stuck.
    """
    n = len(ps)  # N + 1
    N = n - 1
    step_s = budgets.P_S / resolution
    step_r = budgets.P_R / resolution
    value = f(ps[:N], pr[:N])
    moves = [(i, j) for i in range(n) for j in range(n) if i != j]
    while step_s >= min_step * budgets.P_S:
        improved = True
        while improved:
            improved = False
            for (i, j) in moves:
                for (vecs, steps) in (((ps,), (step_s,)), ((pr,), (step_r,)), ((ps, pr), (step_s, step_r))):
                    amounts = [min(st, v[i]) for (v, st) in zip(vecs, steps)]
                    if max(amounts) <= 0.0:
                        continue
                    for (v, amt) in zip(vecs, amounts):
                        v[i] -= amt
                        v[j] += amt
                    new = f(ps[:N], pr[:N])
                    if new > value + 1e-15 * max(1.0, value):
                        value = new
                        improved = True
                        if path is not None:
                            path.append((list(ps[:N]), list(pr[:N])))
                    else:
                        for (v, amt) in zip(vecs, amounts):
                            v[i] += amt
                            v[j] -= amt
        step_s /= 2.0
        step_r /= 2.0
    return value


def _starts(N, budgets, starts, rng):
    yield [budgets.P_S / N] * N + [0.0], [budgets.P_R / N] * N + [0.0]
    for _ in range(starts - 1):
        ws = rng.dirichlet(np.ones(N + 1))
        wr = rng.dirichlet(np.ones(N + 1))
        yield list(budgets.P_S * ws), list(budgets.P_R * wr)


def _feasible(ps, pr, budgets):
    ps = np.maximum(np.asarray(ps, dtype=float), 0.0)
    pr = np.maximum(np.asarray(pr, dtype=float), 0.0)
    if ps.sum() > budgets.P_S:
        ps *= budgets.P_S / ps.sum()
    if pr.sum() > budgets.P_R:
        pr *= budgets.P_R / pr.sum()
    return ps, pr


def _slsqp_af(a, b, c, s, budgets, ps0, pr0):
    from scipy.optimize import minimize
    from .power_af import rate_gradient
    from .rates import af_nats
    N = a.size

    def fun(x):
        return -float(np.sum(af_nats(x[:N], x[N:], a, b, c, s)))

    def jac(x):
        d_ps, d_pr = rate_gradient(x[:N], x[N:], a, b, c, s)
        return -np.concatenate([d_ps, d_pr])

    cons = [
        {'type': 'ineq', 'fun': lambda x: budgets.P_S - np.sum(x[:N]),
         'jac': lambda x: np.concatenate([-np.ones(N), np.zeros(N)])},
        {'type': 'ineq', 'fun': lambda x: budgets.P_R - np.sum(x[N:]),
         'jac': lambda x: np.concatenate([np.zeros(N), -np.ones(N)])},
    ]
    bounds = [(0.0, budgets.P_S)] * N + [(0.0, budgets.P_R)] * N
    res = minimize(fun, np.concatenate([ps0, pr0]), jac=jac, bounds=bounds, constraints=cons,
                   method='SLSQP', options={'ftol': 1e-14, 'maxiter': 500})
    return res.x[:N], res.x[N:]


def _slsqp_df(a, b, c, s, budgets, ps0, pr0):
    """Epigraph form: snr t <= ps a / s and t <= pr b / s, so the objective is smooth.
    """
    from scipy.optimize import minimize
    N = a.size
    eye = np.eye(N)
    zero = np.zeros((N, N))

    def fun(x):
        pr, t = x[N:2 * N], x[2 * N:]
        return -0.5 * float(np.sum(np.log1p(t) - np.log1p(pr * c / s)))

    def jac(x):
        pr, t = x[N:2 * N], x[2 * N:]
        return -0.5 * np.concatenate([np.zeros(N), -(c / s) / (1.0 + pr * c / s), 1.0 / (1.0 + t)])

    cons = [
        {'type': 'ineq', 'fun': lambda x: x[:N] * a / s - x[2 * N:],
         'jac': lambda x: np.hstack([np.diag(a / s), zero, -eye])},
        {'type': 'ineq', 'fun': lambda x: x[N:2 * N] * b / s - x[2 * N:],
         'jac': lambda x: np.hstack([zero, np.diag(b / s), -eye])},
        {'type': 'ineq', 'fun': lambda x: budgets.P_S - np.sum(x[:N]),
         'jac': lambda x: np.concatenate([-np.ones(N), np.zeros(2 * N)])},
        {'type': 'ineq', 'fun': lambda x: budgets.P_R - np.sum(x[N:2 * N]),
         'jac': lambda x: np.concatenate([np.zeros(N), -np.ones(N), np.zeros(N)])},
    ]
    t0 = np.minimum(ps0 * a, pr0 * b) / s
    bounds = [(0.0, budgets.P_S)] * N + [(0.0, budgets.P_R)] * N + [(0.0, None)] * N
    res = minimize(fun, np.concatenate([ps0, pr0, t0]), jac=jac, bounds=bounds, constraints=cons,
                   method='SLSQP', options={'ftol': 1e-14, 'maxiter': 500})
    return res.x[:N], res.x[N:2 * N]


def solve_power_bruteforce(realization, assignment, pairing, budgets, mode,
                           grid_resolution=16, starts=MIN_STARTS, seed=0, polish=3, path=None):
    """Best powers found by multi-start search, for N <= 4.

    Each start runs a shrinking-grid ascent that moves power quanta between
    subcarriers (or to/from unused power) on either budget or both at once.
    The best 'polish' grid points are then refined with SLSQP. Multipliers are
    not estimated (reported as 0). Accepted grid points are appended to 'path'
    if a list is given.
    """
    mode = check_mode(mode)
    budgets = check_budgets(budgets)
    N = realization.num_subcarriers
    if N > MAX_POWER_N:
        raise ValueError('power oracle is limited to N <= {}, not {}'.format(MAX_POWER_N, N))
    if grid_resolution < MIN_GRID_RESOLUTION:
        raise ValueError('grid_resolution must be >= {}, not {}'.format(MIN_GRID_RESOLUTION, grid_resolution))
    starts = max(int(starts), MIN_STARTS)
    g_sr, g_rm, g_re = pair_gains(realization, assignment, pairing)
    s = realization.noise_variance
    f = _objective(mode, list(zip(g_sr.tolist(), g_rm.tolist(), g_re.tolist())), s)
    rng = np.random.default_rng(seed)
    found = []
    for (ps, pr) in _starts(N, budgets, starts, rng):
        value = _transfer_ascent(f, ps, pr, budgets, grid_resolution, 1e-4, path)
        found.append((value, ps[:N], pr[:N]))
    found.sort(key=lambda v: -v[0])
    best_value, best_ps, best_pr = found[0]
    best_ps, best_pr = _feasible(best_ps, best_pr, budgets)
    slsqp = _slsqp_af if mode == AF else _slsqp_df
    for (value, ps0, pr0) in found[:polish]:
        try:
            ps, pr = slsqp(g_sr, g_rm, g_re, s, budgets, np.asarray(ps0), np.asarray(pr0))
        except (ValueError, ArithmeticError) as e:
            LOG.debug('SLSQP polish failed: {}'.format(e))
            continue
        ps, pr = _feasible(ps, pr, budgets)
        value = f(ps.tolist(), pr.tolist())
        if value > best_value:
            best_value, best_ps, best_pr = value, ps, pr
    LOG.debug('Power oracle ({}): {:.8g} bits from {} starts'.format(mode, best_value / LN2, starts))
    return PowerAllocation(np.asarray(best_ps, dtype=float), np.asarray(best_pr, dtype=float), 0.0, 0.0, mode)
