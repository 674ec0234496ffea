from . import functional
from .channel_model import SystemConfig
from .functional import cfg_tobool, parse_floats
from .harness import ExperimentSpec, Scheme
from .io import NativeIO
from .power_af import Budgets
from .util.system import master_seed
import configparser
import json
import logging
import logging.config
import math
import os
import re
import time

logger = logging.getLogger(__name__)

from configparser import ConfigParser


class ConfigError(Exception):
    pass


def parse_cfg_file(config_fn):
    """Return as dict of dicts, defaults filled in.
    Any problem reading or checking the file is a ConfigError.
    """
    try:
        with open(config_fn) as stream:
            ext = os.path.splitext(config_fn)[1]
            if ext in ('.json', '.js'):
                config = json.loads(stream.read())
            else:
                # Parse sections (and case-sensitively), into sub-dicts.
                config = parse_cfg_with_sections(stream)
    except (OSError, ValueError, configparser.Error) as e:
        raise ConfigError('Cannot read config {!r}: {}'.format(config_fn, e)) from e
    check_config_sections(config)  # Ensure that the right sections exist.
    update_defaults(config)
    return config


def parse_cfg_with_sections(stream):
    """Return as dict of dict of ...

    ConfigParser sections become sub-sub sections when separated by dots.

        [foo.bar]
        baz = 42

    is equivalent to JSON

        {"foo": {"bar": {"baz": 42}}}
    """
    content = stream.read()
    result = dict()
    try:
        jdict = json.loads(NativeIO(content).read())
        return jdict
    except ValueError:
        pass
    config = ConfigParser(strict=False)
    config.optionxform = str
    config.read_file(NativeIO(content))
    for sec in config.sections():
        parts = sec.split('.')
        sub = result
        for part in parts[:-1]:
            sub = sub.setdefault(part, dict())
        sub[parts[-1]] = dict(config.items(sec))
    return result


ALLOWED_SECTIONS = ('General', 'experiment', 'sweep', 'oracle', 'study')


def check_config_sections(cfg):
    """And ensure these all exist.
    """
    if not isinstance(cfg, dict):
        raise ConfigError('Config must be a mapping of sections, not {}'.format(type(cfg).__name__))
    all_sections = set(k for k, v in list(cfg.items()) if isinstance(v, dict))
    loose = set(cfg.keys()) - all_sections
    if loose:
        raise ConfigError('Config keys outside any section: {}'.format(sorted(loose)))
    unexpected = all_sections - set(ALLOWED_SECTIONS)
    if unexpected:
        msg = 'You have {} unexpected cfg sections: {}'.format(
            len(unexpected), sorted(unexpected))
        raise ConfigError(msg)
    # Guarantee they all exist.
    for sec in ALLOWED_SECTIONS:
        if sec not in cfg:
            cfg[sec] = dict()


DEFAULTS = {
    'General': {
        'num_subcarriers': 64,
        'num_users': 8,
        'noise_db': 0.0,
        'path_loss_exponent': 3.0,
        'source_pos': '0,0',
        'relay_pos': '1,0',
        'user_region_center': '2,0',
        'user_region_side': 1.0,
        'seed': 0,
        'freeze_placement': False,
        'placement_seed': 0,
    },
    'experiment': {
        'mode': 'af',
        'schemes': 'opa+opt, opa+def, opa+op, epa+opt, epa+def',
        'trials': 1000,
        'n_core': 0,
        'max_failures': 0,
        'output': 'secure_ra.csv',
        'plotdata': '',
    },
    'sweep': {
        'axis': 'ps',
        'values_db': '0, 5, 10, 15, 20',
        'fixed_db': 6.0,
    },
    'oracle': {
        'grid_resolution': 16,
        'power_check': True,
    },
    'study': {
        'ps_db': 15.0,
        'pr_db': 15.0,
        'delta': 0.5,
        'points': 21,
        'output': 'study.json',
    },
}


def update_defaults(cfg):
    """Fill in every section; booleans become bools.
    """
    for (section, defaults) in DEFAULTS.items():
        sub = cfg.setdefault(section, dict())

        def set_default(key, val):
            if key not in sub:
                sub[key] = val
        for (key, val) in defaults.items():
            set_default(key, val)
        check_unexpected_keys(section, sub)
    for (section, key) in (('General', 'freeze_placement'), ('oracle', 'power_check')):
        try:
            cfg[section][key] = cfg_tobool(cfg[section][key])
        except ValueError:
            raise ConfigError('[{}] {} is not a boolean: {!r}'.format(section, key, cfg[section][key]))


def check_unexpected_keys(section, cfg):
    # Warn on unused variables.
    unused = set(cfg.keys()) - set(DEFAULTS[section])
    if unused:
        logger.warning('Unexpected keys in [{}] of input config: {}'.format(section, sorted(unused)))


def _point(text):
    if isinstance(text, (list, tuple)):
        values = [float(v) for v in text]
    else:
        values = parse_floats(str(text))
    if len(values) != 2:
        raise ValueError('expected "x,y", not {!r}'.format(text))
    return tuple(values)


def _floats(text):
    if isinstance(text, (int, float)):
        return [float(text)]
    return parse_floats(text)


def _schemes(text):
    if isinstance(text, (list, tuple)):
        names = text
    else:
        names = [w for w in re.split(r'[,\s]+', text) if w]
    return tuple(Scheme.parse(name) for name in names)


def system_from_config(cfg):
    general = cfg['General']
    try:
        return SystemConfig(
            num_subcarriers=int(general['num_subcarriers']),
            num_users=int(general['num_users']),
            noise_variance=functional.db_to_linear(float(general['noise_db'])),
            path_loss_exponent=float(general['path_loss_exponent']),
            source_pos=_point(general['source_pos']),
            relay_pos=_point(general['relay_pos']),
            user_region_center=_point(general['user_region_center']),
            user_region_side=float(general['user_region_side']),
            freeze_placement=cfg_tobool(general['freeze_placement']),
            placement_seed=int(general['placement_seed']),
        ).validate()
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError('Bad [General] section: {}'.format(e)) from e


def experiment_from_config(cfg, mode=None, sweep=None, seed=None, trials=None, out=None):
    """Build the ExperimentSpec. Keyword arguments (from CLI flags) override the file.
    Budgets and sweep values are P / noise in dB.
    """
    system = system_from_config(cfg)
    exp = cfg['experiment']
    sw = cfg['sweep']
    try:
        seed = master_seed(seed if seed is not None else cfg['General']['seed'])
        plotdata = exp.get('plotdata') or None
        spec = ExperimentSpec(
            system=system,
            mode=str(mode or exp['mode']).lower(),
            schemes=_schemes(exp['schemes']),
            sweep_axis=str(sweep or sw['axis']).lower(),
            sweep_db=tuple(_floats(sw['values_db'])),
            fixed_db=float(sw['fixed_db']),
            trials=int(trials if trials is not None else exp['trials']),
            seed=seed,
            max_failures=int(exp['max_failures']),
            output_path=out or exp['output'] or None,
            plotdata_path=plotdata,
        )
        return spec.validate()
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError('Bad experiment config: {}'.format(e)) from e


def study_budgets(cfg):
    study = cfg['study']
    noise = functional.db_to_linear(float(cfg['General']['noise_db']))
    try:
        budgets = Budgets(noise * functional.db_to_linear(float(study['ps_db'])),
                          noise * functional.db_to_linear(float(study['pr_db'])))
    except (TypeError, ValueError) as e:
        raise ConfigError('Bad [study] section: {}'.format(e)) from e
    if not all(math.isfinite(b) and b > 0 for b in budgets):
        raise ConfigError('Bad [study] budgets: {!r}'.format(budgets))
    return budgets


default_logging_config = """
[loggers]
keys=root,kit,main

[logger_root]
level=WARNING
handlers=console,logfile

[logger_kit]
qualname=secure_relay_kit
level=DEBUG
handlers=
propagate=1

[logger_main]
qualname=secure_ra
level=DEBUG
handlers=
propagate=1

[handlers]
keys=console,logfile

[handler_console]
class=StreamHandler
level=INFO
formatter=brief
args=(sys.stderr,)

[handler_logfile]
class=FileHandler
level=DEBUG
formatter=stamped
args=('secure_ra.log', 'w')

[formatters]
keys=brief,stamped

[formatter_brief]
format=[%(levelname)s] %(message)s

[formatter_stamped]
format=%(asctime)sZ %(levelname)-7s %(name)s:%(lineno)d %(message)s
datefmt=%Y-%m-%dT%H:%M:%S
"""


def _setup_logging(logging_config_fn):
    """See https://docs.python.org/3/library/logging.config.html
    """
    logging.Formatter.converter = time.gmtime  # cannot be done in .ini

    if logging_config_fn:
        if logging_config_fn.endswith('.json'):
            with open(logging_config_fn) as ifs:
                logging.config.dictConfig(json.loads(ifs.read()))
            return
        logger_fileobj = open(logging_config_fn)
    else:
        logger_fileobj = NativeIO(default_logging_config)
    with logger_fileobj:
        logging.config.fileConfig(
            logger_fileobj, defaults={}, disable_existing_loggers=False)


def setup_logger(logging_config_fn):
    global logger
    try:
        _setup_logging(logging_config_fn)
        logger = logging.getLogger('secure_ra')
        logger.info('Setup logging from file "{}".'.format(logging_config_fn))
    except Exception:
        logging.basicConfig()
        logger = logging.getLogger()
        logger.exception(
            'Failed to setup logging from file "{}". Using basicConfig().'.format(logging_config_fn))
    return logger
