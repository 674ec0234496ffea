"""Result files and progress reporting.

Summaries and plot data are written as json or msgpack, chosen by extension.
"""
from .util.system import mkdirs
import io
import json
import logging
import os
import time

import msgpack
import numpy as np

NativeIO = io.StringIO

LOG = logging.getLogger(__name__)


def plain(val):
    """Copy val with numpy scalars and arrays replaced by python values.
    Tuples become lists, as they would after a round trip anyway.
    """
    if isinstance(val, dict):
        return {k: plain(v) for (k, v) in val.items()}
    if isinstance(val, (list, tuple)):
        return [plain(v) for v in val]
    if isinstance(val, np.ndarray):
        return plain(val.tolist())
    if isinstance(val, np.generic):
        return val.item()
    return val


def _dump_json(val):
    return json.dumps(val, sort_keys=True, indent=2, separators=(',', ': ')).encode('ascii') + b'\n'


def _load_json(content):
    return json.loads(content.decode('ascii'))


def _dump_msgpack(val):
    return msgpack.packb(val, use_bin_type=True)


def _load_msgpack(content):
    return msgpack.unpackb(content, raw=False)


CODECS = {
    '.json': (_dump_json, _load_json),
    '.msgpack': (_dump_msgpack, _load_msgpack),
}


def _codec(fn):
    ext = os.path.splitext(fn)[1]
    if ext not in CODECS:
        raise Exception('Unknown extension for {!r}'.format(fn))
    return CODECS[ext]


def deserialize(fn):
    load = _codec(fn)[1]
    with open(fn, 'rb') as ifs:
        content = ifs.read()
    val = load(content)
    LOG.debug('Read {:,d} bytes ({} records) from {!r}'.format(len(content), len(val), fn))
    return val


def serialize(fn, val):
    """Create the dirname if needed.
    The whole file is encoded before it is opened, so a bad value leaves no partial file.
    """
    dump = _codec(fn)[0]
    content = dump(plain(val))
    mkdirs(os.path.dirname(fn))
    with open(fn, 'wb') as ofs:
        ofs.write(content)
    LOG.debug('Wrote {:,d} bytes ({} records) to {!r}'.format(len(content), len(val), fn))


class Percenter(object):
    """Log trial progress at doubling intervals, never sparser than every tenth.

        counter = Percenter('run_experiment', spec.trials, units='trials')
        for trial in range(spec.trials):
            ...
            counter(1)
        counter.finish()
    """
    def __init__(self, name, total, log=LOG.info, units='units'):
        self.name = name
        self.total = total
        self.units = units
        self.log = log
        self.calls = 0
        self.count = 0
        self.step = 1
        self.next_report = 1
        self.started = time.time()
        log('Counting {:,d} {} for {!r}'.format(total, units, name))

    def __call__(self, more, label=''):
        self.calls += 1
        self.count += more
        if self.count < self.next_report and self.count < self.total:
            return
        self.step = max(1, min(2 * self.step, self.total // 10 or 1))
        self.next_report = self.count + self.step
        pct = 100.0 * self.count / self.total if self.total else 100.0
        self.log('{:>8,d}/{:,d} {} {:6.2f}% {:.1f}s {}'.format(
            self.count, self.total, self.units, pct, time.time() - self.started, label).rstrip())

    def finish(self):
        self.log('Counted {:,d} {} in {:,d} calls for {!r} ({:.1f}s)'.format(
            self.count, self.units, self.calls, self.name, time.time() - self.started))
