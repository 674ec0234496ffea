"""Side studies: relay-power perturbation (AF) and pairing tailoring by
effective-gain variance. Both run over Monte Carlo trials from the CLI.
"""
from . import io
from .allocation import allocate
from .functional import compensated_mean
from .harness import realization_for_trial
from .oracle import MAX_PAIRING_N, solve_gains
from .pairing import all_pairings, effective_gains, gain_variance, pair_default
from .power_af import check_budgets, optimal_relay_power
from .rates import check_mode, pair_gains, secure_rate_af, sum_secure_rate
import collections
import logging
import math

import numpy as np
from scipy import stats

LOG = logging.getLogger(__name__)

PERTURBATIONS = ('--', '-+', '+-', '++')

SurveyRow = collections.namedtuple('SurveyRow', ['pairing', 'variance', 'rate'])


def relay_power_perturbation(realization, assignment, pairing, ps, delta):
    """Sum AF rate (bits) with pr = Pr*(ps) ('opt') and with pr = Pr*(ps) +/- delta.
    In scheme 'xy' the first half of the pairs gets sign x, the rest sign y.
    The relay budget is not enforced.
    """
    if not delta >= 0:
        raise ValueError('delta must be >= 0, not {!r}'.format(delta))
    g_sr, g_rm, g_re = pair_gains(realization, assignment, pairing)
    s = realization.noise_variance
    ps = np.asarray(ps, dtype=float)
    if ps.shape != g_sr.shape:
        raise ValueError('ps must have {} entries, not {}'.format(g_sr.size, ps.shape))
    best = optimal_relay_power(ps, g_sr, g_rm, g_re, s)
    half = (ps.size + 1) // 2
    rates = {'opt': math.fsum(np.atleast_1d(secure_rate_af(ps, best, g_sr, g_rm, g_re, s)))}
    for name in PERTURBATIONS:
        signs = np.where(np.arange(ps.size) < half,
                         1.0 if name[0] == '+' else -1.0,
                         1.0 if name[1] == '+' else -1.0)
        pr = np.maximum(best + signs * delta, 0.0)
        rates[name] = math.fsum(np.atleast_1d(secure_rate_af(ps, pr, g_sr, g_rm, g_re, s)))
    return rates


def relay_perturbation_sweep(realization, assignment, pairing, P_S, delta, points=21):
    """For two subcarriers, sweep ps = (t P_S, (1 - t) P_S) over t in [0, 1].
    Return a list of dicts with 't' and one rate per scheme.
    """
    if realization.num_subcarriers != 2:
        raise ValueError('the perturbation sweep needs N == 2, not {}'.format(realization.num_subcarriers))
    if points < 2:
        raise ValueError('need at least 2 points, not {}'.format(points))
    rows = []
    for t in np.linspace(0.0, 1.0, points):
        row = {'t': float(t)}
        row.update(relay_power_perturbation(realization, assignment, pairing,
                                            [t * P_S, (1.0 - t) * P_S], delta))
        rows.append(row)
    return rows


def pairing_survey(realization, assignment, budgets, mode):
    """Every pairing, in lexicographic order, with its effective-gain variance
    and its optimally powered sum rate (bits).
    """
    mode = check_mode(mode)
    budgets = check_budgets(budgets)
    N = realization.num_subcarriers
    if N > MAX_PAIRING_N:
        raise ValueError('pairing survey is limited to N <= {}, not {}'.format(MAX_PAIRING_N, N))
    rows = []
    for pairing in all_pairings(N):
        variance = gain_variance(effective_gains(realization, assignment, pairing, mode))
        g_sr, g_rm, g_re = pair_gains(realization, assignment, pairing)
        powers = solve_gains(g_sr, g_rm, g_re, realization.noise_variance, budgets, mode)
        rate = sum_secure_rate(realization, assignment, pairing, powers, mode).sum
        rows.append(SurveyRow(pairing, variance, rate))
    return rows


def survey_summary(rows, rtol=1e-9):
    """Is the minimal-variance pairing rate-optimal? Ties go to the first row.
    'best_variance_rank' is 0 when the rate-optimal pairing also has the smallest variance.
    """
    if not rows:
        raise ValueError('empty survey')
    min_var = min(rows, key=lambda r: r.variance)
    best = max(rows, key=lambda r: r.rate)
    by_variance = sorted(rows, key=lambda r: r.variance)
    rank = next(i for (i, r) in enumerate(by_variance) if r.pairing == best.pairing)
    return {
        'min_variance_pairing': list(min_var.pairing.as_tuple()),
        'best_pairing': list(best.pairing.as_tuple()),
        'min_variance_is_optimal': min_var.rate >= best.rate - rtol * max(1.0, best.rate),
        'best_variance_rank': rank,
        'rate_gap': best.rate - min_var.rate,
    }


def run_tailoring_study(system, budgets, mode, trials, seed=0):
    """Survey 'trials' realizations; return the fraction where the minimal-variance
    pairing is rate-optimal, plus the Spearman correlation between variance and
    rate pooled over trials (negative when low variance goes with high rate).
    """
    counter = io.Percenter('tailoring study', trials, units='trials')
    hits = 0
    ranks = []
    rhos = []
    for trial in range(trials):
        realization = realization_for_trial(system, seed, trial)
        rows = pairing_survey(realization, allocate(realization), budgets, mode)
        summary = survey_summary(rows)
        hits += summary['min_variance_is_optimal']
        ranks.append(summary['best_variance_rank'])
        if len(rows) > 2:
            rho = stats.spearmanr([r.variance for r in rows], [r.rate for r in rows]).correlation
            if np.isfinite(rho):
                rhos.append(float(rho))
        counter(1)
    counter.finish()
    result = {
        'kind': 'tailoring',
        'mode': mode,
        'trials': trials,
        'optimal_fraction': hits / trials,
        'mean_best_variance_rank': compensated_mean(ranks),
        'mean_spearman': compensated_mean(rhos),
    }
    LOG.info('Minimal-variance pairing optimal in {:.1%} of {} trials'.format(result['optimal_fraction'], trials))
    return result


def run_perturbation_study(system, P_S, delta, trials, seed=0, points=21):
    """Average the perturbation sweep over trials (identity pairing, N == 2).
    'violations' counts points where a perturbed scheme beat 'opt'.
    """
    totals = collections.defaultdict(list)
    violations = 0
    for trial in range(trials):
        realization = realization_for_trial(system, seed, trial)
        assignment = allocate(realization)
        rows = relay_perturbation_sweep(realization, assignment, pair_default(2), P_S, delta, points)
        for (i, row) in enumerate(rows):
            for (name, rate) in row.items():
                if name == 't':
                    continue
                totals[(i, name)].append(rate)
                if name != 'opt' and rate > row['opt'] * (1.0 + 1e-12):
                    violations += 1
    ts = np.linspace(0.0, 1.0, points)
    sweep = []
    for (i, t) in enumerate(ts):
        entry = {'t': float(t)}
        for name in ('opt',) + PERTURBATIONS:
            entry[name] = compensated_mean(totals[(i, name)])
        sweep.append(entry)
    return {'kind': 'relay-perturb', 'trials': trials, 'delta': delta, 'P_S': P_S,
            'sweep': sweep, 'violations': violations}
