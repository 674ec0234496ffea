"""Two-hop channel realizations: source S, relay R, M users in a square.
Each gain is d**(-alpha) times a unit-mean exponential (Rayleigh power) variate.
"""
from .functional import check_finite
import dataclasses
import logging

import numpy as np

LOG = logging.getLogger(__name__)

HEADER = '# secure-relay realization'
TINY = np.finfo(float).tiny


class RealizationFormatError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class SystemConfig:
    num_subcarriers: int = 64
    num_users: int = 8
    noise_variance: float = 1.0
    path_loss_exponent: float = 3.0
    source_pos: tuple = (0.0, 0.0)
    relay_pos: tuple = (1.0, 0.0)
    user_region_center: tuple = (2.0, 0.0)
    user_region_side: float = 1.0
    rng_seed: int = 0
    freeze_placement: bool = False
    placement_seed: int = 0
    user_positions: tuple = None  # ((x, y), ...) overrides random placement

    def validate(self):
        if int(self.num_subcarriers) != self.num_subcarriers or self.num_subcarriers < 1:
            raise ValueError('num_subcarriers must be a positive integer, not {!r}'.format(self.num_subcarriers))
        if int(self.num_users) != self.num_users or self.num_users < 2:
            raise ValueError('num_users must be >= 2 (an eavesdropper is needed), not {!r}'.format(self.num_users))
        if not (self.noise_variance > 0 and np.isfinite(self.noise_variance)):
            raise ValueError('noise_variance must be > 0, not {!r}'.format(self.noise_variance))
        if not self.path_loss_exponent >= 2:
            raise ValueError('path_loss_exponent must be >= 2, not {!r}'.format(self.path_loss_exponent))
        if not self.user_region_side > 0:
            raise ValueError('user_region_side must be > 0, not {!r}'.format(self.user_region_side))
        if np.allclose(self.source_pos, self.relay_pos):
            raise ValueError('relay must not sit on the source: {!r}'.format(self.relay_pos))
        if self.user_positions is not None:
            pos = np.asarray(self.user_positions, dtype=float)
            if pos.shape != (self.num_users, 2):
                raise ValueError('user_positions must be {}x2, not {}'.format(self.num_users, pos.shape))
            if np.any(np.hypot(*(pos - np.asarray(self.relay_pos)).T) == 0):
                raise ValueError('a user sits on the relay')
        return self

    def replace(self, **kwds):
        return dataclasses.replace(self, **kwds)


class ChannelRealization(object):
    """gain_sr[n] (S->R), gain_ru[m][n] (R->U), noise_variance.
    Immutable: the arrays are made read-only.
    """
    __slots__ = ('gain_sr', 'gain_ru', 'noise_variance')

    def __init__(self, gain_sr, gain_ru, noise_variance):
        gain_sr = np.array(gain_sr, dtype=float, ndmin=1)
        gain_ru = np.array(gain_ru, dtype=float, ndmin=2)
        if gain_sr.ndim != 1 or gain_sr.size < 1:
            raise ValueError('gain_sr must be a non-empty vector, got shape {}'.format(gain_sr.shape))
        if gain_ru.ndim != 2 or gain_ru.shape[1] != gain_sr.size:
            raise ValueError('gain_ru must be M x {}, got shape {}'.format(gain_sr.size, gain_ru.shape))
        if gain_ru.shape[0] < 2:
            raise ValueError('need at least 2 users, got {}'.format(gain_ru.shape[0]))
        check_finite('ChannelRealization', gain_sr, gain_ru, noise_variance)
        if np.any(gain_sr <= 0) or np.any(gain_ru <= 0):
            raise ValueError('all gains must be strictly positive')
        if not noise_variance > 0:
            raise ValueError('noise_variance must be > 0, not {!r}'.format(noise_variance))
        gain_sr.flags.writeable = False
        gain_ru.flags.writeable = False
        object.__setattr__(self, 'gain_sr', gain_sr)
        object.__setattr__(self, 'gain_ru', gain_ru)
        object.__setattr__(self, 'noise_variance', float(noise_variance))

    def __setattr__(self, name, value):
        raise AttributeError('ChannelRealization is immutable')

    @property
    def num_subcarriers(self):
        return self.gain_sr.size

    @property
    def num_users(self):
        return self.gain_ru.shape[0]

    def __eq__(self, other):
        if not isinstance(other, ChannelRealization):
            return NotImplemented
        return (self.noise_variance == other.noise_variance
                and np.array_equal(self.gain_sr, other.gain_sr)
                and np.array_equal(self.gain_ru, other.gain_ru))

    def __repr__(self):
        return 'ChannelRealization(N={}, M={}, noise_variance={!r})'.format(
            self.num_subcarriers, self.num_users, self.noise_variance)

    def __reduce__(self):
        return (ChannelRealization, (np.array(self.gain_sr), np.array(self.gain_ru), self.noise_variance))


def exponential_fading(rng, shape):
    fading = rng.exponential(1.0, size=shape)
    return np.where(fading > 0.0, fading, TINY)


def user_positions(config, rng):
    if config.user_positions is not None:
        return np.asarray(config.user_positions, dtype=float)
    if config.freeze_placement:
        rng = np.random.default_rng(config.placement_seed)
    half = config.user_region_side / 2.0
    offsets = rng.uniform(-half, half, size=(config.num_users, 2))
    return np.asarray(config.user_region_center, dtype=float) + offsets


def generate_realization(config, fading=None):
    """Draw one realization. Pure function of config (seed included).
    'fading(rng, shape)' replaces the exponential draw (e.g. unit fading in tests).
    """
    config.validate()
    if fading is None:
        fading = exponential_fading
    rng = np.random.default_rng(config.rng_seed)
    N = config.num_subcarriers
    M = config.num_users
    alpha = config.path_loss_exponent
    relay = np.asarray(config.relay_pos, dtype=float)
    users = user_positions(config, rng)
    d_sr = float(np.hypot(*(relay - np.asarray(config.source_pos, dtype=float))))
    d_ru = np.hypot(*(users - relay).T)
    gain_sr = d_sr ** (-alpha) * fading(rng, (N,))
    gain_ru = (d_ru ** (-alpha))[:, None] * fading(rng, (M, N))
    return ChannelRealization(gain_sr, gain_ru, config.noise_variance)


def save_realization(r):
    """Return the text document as bytes.
    repr() keeps every float exact.
    """
    lines = [
        HEADER,
        'dims {:d} {:d}'.format(r.num_subcarriers, r.num_users),
        'noise_variance {!r}'.format(r.noise_variance),
        'sr ' + ' '.join(repr(float(g)) for g in r.gain_sr),
    ]
    for m in range(r.num_users):
        lines.append('ru {:d} '.format(m) + ' '.join(repr(float(g)) for g in r.gain_ru[m]))
    return ('\n'.join(lines) + '\n').encode('ascii')


def _floats(fields, lineno):
    try:
        return [float(f) for f in fields]
    except ValueError as e:
        raise RealizationFormatError('line {}: {}'.format(lineno, e))


def load_realization(data):
    if isinstance(data, bytes):
        try:
            data = data.decode('ascii')
        except UnicodeDecodeError as e:
            raise RealizationFormatError('not an ascii document: {}'.format(e))
    lines = [line.strip() for line in data.splitlines()]
    lines = [(i + 1, line) for (i, line) in enumerate(lines) if line]
    if not lines or lines[0][1] != HEADER:
        raise RealizationFormatError('missing header {!r}'.format(HEADER))
    expected = ['dims', 'noise_variance', 'sr']
    if len(lines) < 4:
        raise RealizationFormatError('truncated document: {} lines'.format(len(lines)))
    for ((lineno, line), key) in zip(lines[1:4], expected):
        if line.split()[0] != key:
            raise RealizationFormatError('line {}: expected {!r}, got {!r}'.format(lineno, key, line))
    lineno, line = lines[1]
    try:
        N, M = [int(f) for f in line.split()[1:]]
    except ValueError:
        raise RealizationFormatError('line {}: bad dims {!r}'.format(lineno, line))
    if N < 1 or M < 2:
        raise ValueError('invalid dimensions N={} M={}'.format(N, M))
    lineno, line = lines[2]
    noise = _floats(line.split()[1:], lineno)
    if len(noise) != 1:
        raise RealizationFormatError('line {}: expected one noise value'.format(lineno))
    lineno, line = lines[3]
    gain_sr = _floats(line.split()[1:], lineno)
    if len(gain_sr) != N:
        raise RealizationFormatError('line {}: expected {} S->R gains, got {}'.format(lineno, N, len(gain_sr)))
    rows = lines[4:]
    if len(rows) != M:
        raise RealizationFormatError('expected {} R->U rows, got {} (truncated?)'.format(M, len(rows)))
    gain_ru = []
    for (m, (lineno, line)) in enumerate(rows):
        fields = line.split()
        if fields[:2] != ['ru', str(m)]:
            raise RealizationFormatError('line {}: expected "ru {}", got {!r}'.format(lineno, m, line[:20]))
        row = _floats(fields[2:], lineno)
        if len(row) != N:
            raise RealizationFormatError('line {}: expected {} R->U gains, got {}'.format(lineno, N, len(row)))
        gain_ru.append(row)
    return ChannelRealization(gain_sr, gain_ru, noise[0])
