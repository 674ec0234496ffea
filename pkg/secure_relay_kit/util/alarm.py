"""Record an unexpected failure of the command line for batch drivers.
"""
import datetime
import os
import traceback
import uuid

ERRFILE_ENV = 'SECURE_RA_ERRFILE'


def alarm_record(e, tb):
    record = {
        'exception': type(e).__name__,
        'message': str(e) if e.__cause__ is None else '{}\n{}'.format(e, e.__cause__),
        'info': tb,
        'severity': 'ERROR',
        'owner': 'secure-ra',
        'createdAt': datetime.datetime.now().strftime('%Y-%m-%dT%H:%M:%S'),
        'id': str(uuid.uuid4()),
    }
    # SolverError carries the KKT residuals of the last iterate.
    residuals = getattr(e, 'residuals', None)
    if residuals:
        record['residuals'] = {k: float(v) for (k, v) in residuals.items()}
    return record


def alarm(e, fn='alarms.json'):
    """Call from an except block.
    The traceback goes to $SECURE_RA_ERRFILE, if set, and a one-record list goes to fn.
    """
    from ..io import serialize

    tb = traceback.format_exc()
    errfile = os.environ.get(ERRFILE_ENV)
    if errfile:
        with open(errfile, 'w') as ofs:
            ofs.write(tb)
    serialize(fn, [alarm_record(e, tb)])
