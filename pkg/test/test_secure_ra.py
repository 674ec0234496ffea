import secure_relay_kit.mains.secure_ra as mod
from secure_relay_kit import harness
from secure_relay_kit.functional import SolverError
from secure_relay_kit.io import deserialize
import helpers
import json
import os.path
import pytest


def test_help():
    try:
        mod.main(['prog', '--help'])
    except SystemExit:
        pass


@pytest.fixture
def rundir(tmpdir):
    """cwd in tmpdir, with a logging config that leaves handlers alone.
    """
    tmpdir.join('log.json').write(json.dumps({'version': 1, 'disable_existing_loggers': False}))
    with tmpdir.as_cwd():
        yield tmpdir


def argv(*words):
    cfg = os.path.join(helpers.get_test_data_dir(), 'small.cfg')
    words = list(words)
    return ['prog', '--log-config', 'log.json', words[0], '--config', cfg] + words[1:]


def test_validate(rundir, capsys):
    assert mod.main(argv('validate', '--mode', 'df')) == mod.EXIT_OK
    out, err = capsys.readouterr()
    assert 'is valid: mode=df N=3 M=2 schemes=opa+opt,opa+def,epa+def' in out


def test_run(rundir):
    assert mod.main(argv('run', '--plotdata', 'plot.json')) == mod.EXIT_OK
    table = harness.load_csv('out/small.csv')
    assert len(table) == 6
    assert table.schemes() == ['opa+opt', 'opa+def', 'epa+def']
    assert set(deserialize('plot.json')) == {'opa+opt', 'opa+def', 'epa+def'}


def test_run_same_seed_same_bytes(rundir):
    assert mod.main(argv('run', '--out', 'a.csv', '--seed', '9')) == mod.EXIT_OK
    assert mod.main(argv('run', '--out', 'b.csv', '--seed', '9')) == mod.EXIT_OK
    assert rundir.join('a.csv').read_binary() == rundir.join('b.csv').read_binary()


def test_bad_config(rundir):
    args = ['prog', '--log-config', 'log.json', 'run', '--config', 'missing.cfg']
    assert mod.main(args) == mod.EXIT_CONFIG
    rundir.join('bad.cfg').write('[General]\nnum_users = 1\n')
    args = ['prog', '--log-config', 'log.json', 'validate', '--config', 'bad.cfg']
    assert mod.main(args) == mod.EXIT_CONFIG


def test_failures_exit_code(rundir, monkeypatch):
    def broken(*args, **kwds):
        raise SolverError('Stuck.')
    monkeypatch.setattr(harness, 'scheme_rate', broken)
    assert mod.main(argv('run', '--trials', '1')) == mod.EXIT_FAILURES
    # the table is still written
    assert len(harness.load_csv('out/small.csv')) == 6


def test_unexpected_error_raises_alarm(rundir, monkeypatch):
    def broken(*args, **kwds):
        raise RuntimeError('boom')
    monkeypatch.setattr(harness, 'run_experiment', broken)
    monkeypatch.setenv('SECURE_RA_ERRFILE', str(rundir.join('err.txt')))
    with pytest.raises(RuntimeError):
        mod.main(argv('run'))
    (record,) = deserialize('alarms.json')
    assert record['exception'] == 'RuntimeError'
    assert 'boom' in rundir.join('err.txt').read()


def test_oracle(rundir):
    assert mod.main(argv('oracle', '--trials', '1', '--out', 'cert.json')) == mod.EXIT_OK
    summary = deserialize('cert.json')
    assert summary['pairing_violations'] == 0
    assert summary['power_violations'] == 0
    assert [p['sweep_db'] for p in summary['points']] == [0.0, 10.0]


def test_study_tailoring(rundir):
    assert mod.main(argv('study', '--trials', '2')) == mod.EXIT_OK
    summary = deserialize('out/study.json')
    assert summary['kind'] == 'tailoring'
    assert summary['trials'] == 2


def test_study_perturbation_needs_two_subcarriers(rundir):
    assert mod.main(argv('study', '--kind', 'relay-perturb', '--trials', '1')) == mod.EXIT_CONFIG


def test_run_without_plotdata(rundir, mocker):
    emit = mocker.patch('secure_relay_kit.harness.emit_plotdata')
    assert mod.main(argv('run', '--trials', '1', '--out', 'x.csv')) == mod.EXIT_OK
    assert not emit.called
    assert rundir.join('x.csv').check()
