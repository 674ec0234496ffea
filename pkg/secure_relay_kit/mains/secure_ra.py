"""Secure relay OFDMA experiments.

Exit codes: 0 success, 1 config error, 2 too many solver failures
(or oracle violations) for the configured max_failures.
"""
from .. import harness, io, run_support, studies
from ..run_support import ConfigError
from ..util import alarm
import argparse
import logging
import sys

LOG = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILURES = 2


def _spec(args, **overrides):
    cfg = run_support.parse_cfg_file(args.config)
    spec = run_support.experiment_from_config(
        cfg, mode=args.mode, seed=args.seed, trials=args.trials, **overrides)
    return cfg, spec


def cmd_run(args):
    cfg, spec = _spec(args, sweep=args.sweep, out=args.out)
    n_core = args.n_core if args.n_core is not None else int(cfg['experiment']['n_core'])
    table = harness.run_experiment(spec, n_core=n_core)
    harness.emit_csv(table, spec.output_path)
    plotdata = args.plotdata or spec.plotdata_path
    if plotdata:
        harness.emit_plotdata(table, plotdata)
    if table.total_failures > spec.max_failures:
        LOG.error('{} excluded trials exceed max_failures={}'.format(table.total_failures, spec.max_failures))
        return EXIT_FAILURES
    return EXIT_OK


def cmd_validate(args):
    cfg, spec = _spec(args, sweep=args.sweep)
    print('Config {!r} is valid: mode={} N={} M={} schemes={} sweep {} over {} dB, {} trials'.format(
        args.config, spec.mode, spec.system.num_subcarriers, spec.system.num_users,
        ','.join(s.name for s in spec.schemes), spec.sweep_axis, list(spec.sweep_db), spec.trials))
    return EXIT_OK


def cmd_oracle(args):
    cfg, spec = _spec(args, sweep=args.sweep)
    oracle = cfg['oracle']
    n_core = args.n_core if args.n_core is not None else int(cfg['experiment']['n_core'])
    try:
        summary = harness.run_certification(spec, grid_resolution=int(oracle['grid_resolution']),
                                            power_check=oracle['power_check'], n_core=n_core)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    if args.out:
        io.serialize(args.out, summary)
    bad = summary['pairing_violations'] + summary['power_violations'] + summary['excluded']
    if bad > spec.max_failures:
        LOG.error('{} oracle violations/exclusions exceed max_failures={}'.format(bad, spec.max_failures))
        return EXIT_FAILURES
    return EXIT_OK


def cmd_study(args):
    cfg, spec = _spec(args)
    study = cfg['study']
    budgets = run_support.study_budgets(cfg)
    try:
        if args.kind == 'tailoring':
            summary = studies.run_tailoring_study(spec.system, budgets, spec.mode, spec.trials, seed=spec.seed)
        else:
            summary = studies.run_perturbation_study(spec.system, budgets.P_S, float(study['delta']),
                                                     spec.trials, seed=spec.seed, points=int(study['points']))
    except ValueError as e:
        raise ConfigError(str(e)) from e
    io.serialize(args.out or study['output'], summary)
    return EXIT_OK


class HelpF(argparse.RawTextHelpFormatter, argparse.ArgumentDefaultsHelpFormatter):
    pass


def add_common_arguments(parser):
    parser.add_argument('--config', required=True,
        help='ini (or .json) config file, sections [General] [experiment] [sweep] [oracle] [study]')
    parser.add_argument('--mode', choices=['af', 'df'], default=None,
        help='relaying mode; overrides [experiment] mode')
    parser.add_argument('--seed', default=None,
        help='64-bit master seed; overrides [General] seed. Empty means "draw one".')
    parser.add_argument('--trials', type=int, default=None,
        help='Monte Carlo trials; overrides [experiment] trials')


def add_sweep_argument(parser):
    parser.add_argument('--sweep', choices=['ps', 'pr'], default=None,
        help='budget to sweep; overrides [sweep] axis')


def add_core_argument(parser):
    parser.add_argument('--n-core', type=int, default=None,
        help='worker processes; 0 runs in-process. Overrides [experiment] n_core')


def parse_args(argv):
    description = 'Sum secure rate of relay-assisted OFDMA with untrusted users.'
    epilog = __doc__
    parser = argparse.ArgumentParser(
        description=description,
        epilog=epilog,
        formatter_class=HelpF,
    )
    parser.add_argument('--log-config', default='',
        help='logging config (.ini or .json); default logs INFO to stderr and DEBUG to secure_ra.log')

    help_run = 'Monte Carlo budget sweep; write CSV (and plot data)'
    help_validate = 'check the config and exit'
    help_oracle = 'certify the fast pairing/power paths against brute force (small N)'
    help_study = 'relay-power perturbation or pairing-tailoring study'

    subparsers = parser.add_subparsers(dest='command', help='sub-command help')
    subparsers.required = True

    parser_run = subparsers.add_parser('run',
            formatter_class=HelpF,
            description=help_run,
            help=help_run)
    add_common_arguments(parser_run)
    add_sweep_argument(parser_run)
    add_core_argument(parser_run)
    parser_run.add_argument('--out', default=None,
        help='CSV path; overrides [experiment] output')
    parser_run.add_argument('--plotdata', default=None,
        help='plot-data path (.json or .msgpack); overrides [experiment] plotdata')
    parser_run.set_defaults(func=cmd_run)

    parser_validate = subparsers.add_parser('validate',
            formatter_class=HelpF,
            description=help_validate,
            help=help_validate)
    add_common_arguments(parser_validate)
    add_sweep_argument(parser_validate)
    parser_validate.set_defaults(func=cmd_validate)

    parser_oracle = subparsers.add_parser('oracle',
            formatter_class=HelpF,
            description=help_oracle,
            help=help_oracle)
    add_common_arguments(parser_oracle)
    add_sweep_argument(parser_oracle)
    add_core_argument(parser_oracle)
    parser_oracle.add_argument('--out', default=None,
        help='summary path (.json or .msgpack)')
    parser_oracle.set_defaults(func=cmd_oracle)

    parser_study = subparsers.add_parser('study',
            formatter_class=HelpF,
            description=help_study,
            help=help_study)
    add_common_arguments(parser_study)
    parser_study.add_argument('--kind', choices=['relay-perturb', 'tailoring'], default='tailoring',
        help='which study')
    parser_study.add_argument('--out', default=None,
        help='summary path (.json or .msgpack); overrides [study] output')
    parser_study.set_defaults(func=cmd_study)

    args = parser.parse_args(argv[1:])
    return args


def main(argv=sys.argv):
    args = parse_args(argv)
    run_support.setup_logger(args.log_config)
    try:
        return args.func(args)
    except ConfigError as e:
        LOG.error('Config error: {}'.format(e))
        return EXIT_CONFIG
    except Exception as e:
        alarm.alarm(e)
        raise


if __name__ == '__main__':  # pragma: no cover
    sys.exit(main())
