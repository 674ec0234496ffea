"""Monte Carlo sweeps over the budgets for a matrix of schemes.

A scheme is a power policy (OPA: optimal, EPA: equal split) combined with a
pairing policy (def: identity, opt: the mode's tailored pairing, op: ordered
by gain, brute: exhaustive search). Rates are reported in bits per OFDM
symbol per subcarrier.

Every trial draws one realization from SeedSequence([seed, trial]) and
reuses it for every sweep point and scheme.
"""
from . import io, multiproc
from .allocation import allocate
from .channel_model import SystemConfig, generate_realization
from .functional import SolverError, compensated_mean, db_to_linear, std_error
from .oracle import MAX_PAIRING_N, MAX_POWER_N, brute_force_scp, solve_power_bruteforce
from .pairing import optimize_df, pair_af, pair_default, pair_df, pair_ordered
from .power_af import Budgets, PowerAllocation, solve_af
from .power_df import solve_df
from .rates import AF, DF, check_mode, sum_secure_rate
import collections
import csv
import dataclasses
import logging
import math
import os

import numpy as np

LOG = logging.getLogger(__name__)

OPA = 'opa'
EPA = 'epa'
POWER_SCHEMES = (OPA, EPA)
DEF = 'def'
OPT = 'opt'
OP = 'op'
BRUTE = 'brute'
PAIRING_SCHEMES = (DEF, OPT, OP, BRUTE)
SWEEP_AXES = ('ps', 'pr')

CSV_HEADER = ['scheme', 'mode', 'sweep_axis', 'sweep_db', 'mean_rate', 'stderr', 'trials']


class Scheme(collections.namedtuple('Scheme', ['power', 'pairing'])):
    __slots__ = ()

    @property
    def name(self):
        return '{}+{}'.format(self.power, self.pairing)

    @classmethod
    def parse(cls, text):
        """
        >>> Scheme.parse('OPA+opt')
        Scheme(power='opa', pairing='opt')
        """
        try:
            power, pairing = text.strip().lower().split('+')
        except ValueError:
            raise ValueError('scheme must look like "opa+opt", not {!r}'.format(text))
        if power not in POWER_SCHEMES:
            raise ValueError('power scheme must be one of {}, not {!r}'.format(POWER_SCHEMES, power))
        if pairing not in PAIRING_SCHEMES:
            raise ValueError('pairing scheme must be one of {}, not {!r}'.format(PAIRING_SCHEMES, pairing))
        return cls(power, pairing)


ResultRow = collections.namedtuple('ResultRow', CSV_HEADER)


@dataclasses.dataclass(frozen=True)
class ExperimentSpec:
    system: SystemConfig = SystemConfig()
    mode: str = AF
    schemes: tuple = (Scheme(OPA, OPT), Scheme(OPA, DEF))
    sweep_axis: str = 'ps'
    sweep_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    fixed_db: float = 6.0
    trials: int = 1000
    seed: int = 0
    max_failures: int = 0
    output_path: str = None
    plotdata_path: str = None

    def validate(self):
        self.system.validate()
        check_mode(self.mode)
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError('trials must be >= 1, not {!r}'.format(self.trials))
        if self.sweep_axis not in SWEEP_AXES:
            raise ValueError('sweep axis must be one of {}, not {!r}'.format(SWEEP_AXES, self.sweep_axis))
        if not self.sweep_db:
            raise ValueError('sweep has no values')
        if not all(math.isfinite(v) for v in self.sweep_db) or not math.isfinite(self.fixed_db):
            raise ValueError('sweep values must be finite: {!r} fixed={!r}'.format(self.sweep_db, self.fixed_db))
        if not self.schemes:
            raise ValueError('no schemes to run')
        for scheme in self.schemes:
            if scheme.pairing == BRUTE:
                if scheme.power != OPA:
                    raise ValueError('brute-force pairing needs optimal power, not {!r}'.format(scheme.name))
                if self.system.num_subcarriers > MAX_PAIRING_N:
                    raise ValueError('brute-force pairing needs N <= {}, not {}'.format(
                        MAX_PAIRING_N, self.system.num_subcarriers))
        if self.max_failures < 0:
            raise ValueError('max_failures must be >= 0, not {!r}'.format(self.max_failures))
        return self

    def budgets(self, sweep_db):
        """Budgets are given as P / noise in dB.
        """
        noise = self.system.noise_variance
        swept = noise * db_to_linear(sweep_db)
        fixed = noise * db_to_linear(self.fixed_db)
        if self.sweep_axis == 'ps':
            return Budgets(swept, fixed)
        return Budgets(fixed, swept)


class ResultTable(object):
    """Rows in (sweep point, scheme) order, plus per-scheme counts of excluded trials.
    """
    def __init__(self, rows=(), failures=None):
        self.rows = list(rows)
        self.failures = dict(failures or {})

    def __eq__(self, other):
        return isinstance(other, ResultTable) and self.rows == other.rows

    def __len__(self):
        return len(self.rows)

    def schemes(self):
        seen = []
        for row in self.rows:
            if row.scheme not in seen:
                seen.append(row.scheme)
        return seen

    def series(self, scheme):
        return [row for row in self.rows if row.scheme == scheme]

    @property
    def total_failures(self):
        return sum(self.failures.values())


def realization_for_trial(system, seed, trial):
    """Realization of one trial; depends only on (system, seed, trial).
    """
    return generate_realization(system.replace(rng_seed=np.random.SeedSequence([seed, trial])))


def equal_powers(N, budgets, mode):
    return PowerAllocation(np.full(N, budgets.P_S / N), np.full(N, budgets.P_R / N), 0.0, 0.0, mode)


def _fixed_pairings(realization, assignment, mode):
    N = realization.num_subcarriers
    found = {DEF: pair_default(N), OP: pair_ordered(realization, assignment)}
    if mode == AF:
        found[OPT] = pair_af(realization, assignment)
    return found


def scheme_rate(realization, assignment, scheme, budgets, mode, fixed=None):
    """Sum secure rate (bits) of one scheme on one realization.
    May raise SolverError.
    """
    if fixed is None:
        fixed = _fixed_pairings(realization, assignment, mode)
    N = realization.num_subcarriers
    if scheme.pairing == BRUTE:
        return brute_force_scp(realization, assignment, budgets, mode).best_rate
    if scheme.pairing == OPT and mode == DF:
        if scheme.power == OPA:
            pairing, powers, _ = optimize_df(realization, assignment, budgets)
            return sum_secure_rate(realization, assignment, pairing, powers, mode).sum
        pairing, _ = pair_df(realization, assignment, budgets)
    else:
        pairing = fixed[scheme.pairing]
    if scheme.power == EPA:
        powers = equal_powers(N, budgets, mode)
    elif mode == AF:
        powers = solve_af(realization, assignment, pairing, budgets)
    else:
        powers = solve_df(realization, assignment, pairing, budgets)[0]
    return sum_secure_rate(realization, assignment, pairing, powers, mode).sum


def _run_trial(args):
    """Return {(point index, scheme): rate per subcarrier or None}.
    """
    (spec, trial) = args
    realization = realization_for_trial(spec.system, spec.seed, trial)
    assignment = allocate(realization)
    fixed = _fixed_pairings(realization, assignment, spec.mode)
    N = realization.num_subcarriers
    out = {}
    for (i, db) in enumerate(spec.sweep_db):
        budgets = spec.budgets(db)
        for scheme in spec.schemes:
            try:
                rate = scheme_rate(realization, assignment, scheme, budgets, spec.mode, fixed) / N
            except SolverError as e:
                LOG.warning('Trial {} at {} dB, {}: excluded ({})'.format(trial, db, scheme.name, e))
                rate = None
            out[(i, scheme)] = rate
    return out


def run_experiment(spec, n_core=0):
    """Return ResultTable. Deterministic for a fixed spec.seed, whatever n_core is.
    """
    spec.validate()
    LOG.info('Running {} trials of {} ({}), {} sweep points, schemes {}'.format(
        spec.trials, spec.mode, spec.sweep_axis, len(spec.sweep_db), [s.name for s in spec.schemes]))
    jobs = [(spec, trial) for trial in range(spec.trials)]
    counter = io.Percenter('run_experiment', spec.trials, units='trials')
    collected = collections.defaultdict(list)
    failures = collections.Counter({s.name: 0 for s in spec.schemes})
    pool = multiproc.Pool(n_core)
    try:
        for result in pool.imap(_run_trial, jobs):
            for (key, rate) in result.items():
                if rate is None:
                    failures[key[1].name] += 1
                else:
                    collected[key].append(rate)
            counter(1)
    finally:
        pool.terminate()
    counter.finish()
    rows = []
    for (i, db) in enumerate(spec.sweep_db):
        for scheme in spec.schemes:
            values = collected[(i, scheme)]
            rows.append(ResultRow(scheme.name, spec.mode, spec.sweep_axis, float(db),
                                  compensated_mean(values), std_error(values), len(values)))
    if sum(failures.values()):
        LOG.warning('Excluded trials per scheme: {}'.format(dict(failures)))
    return ResultTable(rows, dict(failures))


def emit_csv(table, path):
    """CRLF-terminated CSV; floats use repr so equal tables give identical bytes.
    """
    io.mkdirs(os.path.dirname(path))
    with open(path, 'w', newline='') as ofs:
        writer = csv.writer(ofs)
        writer.writerow(CSV_HEADER)
        for row in table.rows:
            writer.writerow([row.scheme, row.mode, row.sweep_axis,
                             repr(float(row.sweep_db)), repr(float(row.mean_rate)),
                             repr(float(row.stderr)), int(row.trials)])
    LOG.info('Wrote {} rows to {!r}'.format(len(table.rows), path))


def load_csv(path):
    with open(path, newline='') as ifs:
        reader = csv.reader(ifs)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError('{!r}: unexpected header {!r}'.format(path, header))
        rows = []
        for (lineno, fields) in enumerate(reader, start=2):
            if len(fields) != len(CSV_HEADER):
                raise ValueError('{!r}:{}: expected {} fields, got {}'.format(
                    path, lineno, len(CSV_HEADER), len(fields)))
            scheme, mode, axis, db, mean, err, trials = fields
            rows.append(ResultRow(scheme, mode, axis, float(db), float(mean), float(err), int(trials)))
    return ResultTable(rows)


def plotdata(table):
    data = {}
    for scheme in table.schemes():
        series = table.series(scheme)
        data[scheme] = {
            'mode': series[0].mode,
            'sweep_axis': series[0].sweep_axis,
            'sweep_db': [r.sweep_db for r in series],
            'mean_rate': [r.mean_rate for r in series],
            'stderr': [r.stderr for r in series],
        }
    return data


def emit_plotdata(table, path):
    """One series per scheme; .json or .msgpack, by extension.
    """
    io.mkdirs(os.path.dirname(path))
    io.serialize(path, plotdata(table))


def _certify_trial(args):
    """Compare the tailored pairing with exhaustive pairing (and, for small N,
    the solver with the power oracle) at every sweep point.
    """
    (spec, trial, grid_resolution, power_check) = args
    realization = realization_for_trial(spec.system, spec.seed, trial)
    assignment = allocate(realization)
    N = realization.num_subcarriers
    out = []
    for (i, db) in enumerate(spec.sweep_db):
        budgets = spec.budgets(db)
        try:
            fast = scheme_rate(realization, assignment, Scheme(OPA, OPT), budgets, spec.mode)
            brute = brute_force_scp(realization, assignment, budgets, spec.mode)
        except SolverError as e:
            LOG.warning('Certification trial {} at {} dB excluded: {}'.format(trial, db, e))
            out.append((i, None, None, None))
            continue
        power_gap = None
        if power_check and N <= MAX_POWER_N:
            pairing = brute.best_pairing
            powers = solve_power_bruteforce(realization, assignment, pairing, budgets, spec.mode,
                                            grid_resolution=grid_resolution, seed=trial)
            searched = sum_secure_rate(realization, assignment, pairing, powers, spec.mode).sum
            power_gap = (searched - brute.best_rate) / max(1.0, brute.best_rate)
        out.append((i, fast, brute.best_rate, power_gap))
    return out


def run_certification(spec, grid_resolution=16, power_check=True, n_core=0, rtol=1e-4):
    """Desk-scale check of the fast paths against the oracles.

    A pairing violation is a tailored rate above the exhaustive one; a power
    violation is a searched rate above the solver's by more than rtol.
    Return a summary dict with per-point mean rates.
    """
    spec.validate()
    if spec.system.num_subcarriers > MAX_PAIRING_N:
        raise ValueError('certification needs N <= {}, not {}'.format(MAX_PAIRING_N, spec.system.num_subcarriers))
    jobs = [(spec, trial, grid_resolution, power_check) for trial in range(spec.trials)]
    fast = collections.defaultdict(list)
    brute = collections.defaultdict(list)
    pairing_violations = 0
    power_violations = 0
    excluded = 0
    counter = io.Percenter('run_certification', spec.trials, units='trials')
    pool = multiproc.Pool(n_core)
    try:
        for result in pool.imap(_certify_trial, jobs):
            for (i, f, b, gap) in result:
                if f is None:
                    excluded += 1
                    continue
                fast[i].append(f)
                brute[i].append(b)
                if f > b + rtol * max(1.0, b):
                    pairing_violations += 1
                if gap is not None and gap > rtol:
                    power_violations += 1
            counter(1)
    finally:
        pool.terminate()
    counter.finish()
    points = []
    for (i, db) in enumerate(spec.sweep_db):
        f = compensated_mean(fast[i])
        b = compensated_mean(brute[i])
        points.append({'sweep_db': float(db), 'opt_mean': f, 'brute_mean': b,
                       'ratio': f / b if b > 0 else 1.0, 'trials': len(fast[i])})
    summary = {
        'mode': spec.mode,
        'sweep_axis': spec.sweep_axis,
        'points': points,
        'pairing_violations': pairing_violations,
        'power_violations': power_violations,
        'excluded': excluded,
    }
    LOG.info('Certification: {} pairing and {} power violations, {} excluded'.format(
        pairing_violations, power_violations, excluded))
    return summary
