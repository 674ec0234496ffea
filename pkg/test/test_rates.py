import secure_relay_kit.rates as mod
from secure_relay_kit.pairing import Pairing
from secure_relay_kit.power_af import PowerAllocation, optimal_relay_power
import helpers
import math
import pytest

import numpy as np


def af_snr(ps, pr, g_sr, g, noise):
    a = ps * g_sr
    b = pr * g
    return a * b / (noise * (noise + a + b))


def test_af_equal_gains_zero():
    assert mod.secure_rate_af(3.0, 2.0, 1.5, 0.7, 0.7, 1.0) == 0.0


def test_af_zero_relay_power():
    assert mod.secure_rate_af(3.0, 0.0, 1.5, 2.0, 0.7, 1.0) == 0.0


def test_af_matches_end_to_end_snr():
    ps, pr, g_sr, g_rm, g_re, noise = 2.0, 1.0, 4.0, 3.0, 1.0, 1.0
    snr_m = af_snr(ps, pr, g_sr, g_rm, noise)
    snr_e = af_snr(ps, pr, g_sr, g_re, noise)
    assert snr_m == pytest.approx(2.0)
    assert snr_e == pytest.approx(0.8)
    expected = 0.5 * (math.log2(1 + snr_m) - math.log2(1 + snr_e))
    got = mod.secure_rate_af(ps, pr, g_sr, g_rm, g_re, noise)
    assert got == pytest.approx(expected, rel=1e-13)
    assert got == pytest.approx(0.5 * math.log2(5.0 / 3.0), rel=1e-13)


def test_df_equalized():
    # ps g_sr == pr g_rm == 4
    got = mod.secure_rate_df(2.0, 1.0, 2.0, 4.0, 1.0, 1.0)
    assert got == pytest.approx(0.5 * math.log2(5.0 / 2.0), rel=1e-13)


def test_df_eavesdropper_stronger_than_first_hop():
    assert mod.secure_rate_df(1.0, 2.0, 1.0, 4.0, 0.6, 1.0) == 0.0


def test_df_hand_value():
    got = mod.secure_rate_df(1.0, 1.0, 2.0, 4.0, 1.0, 1.0)
    assert got == pytest.approx(0.5 * (math.log2(3.0) - 1.0), rel=1e-13)


def test_rates_broadcast():
    ps = np.array([0.0, 1.0, 2.0])
    got = mod.secure_rate_af(ps, 1.0, 4.0, 3.0, 1.0, 1.0)
    assert got.shape == (3,)
    assert got[0] == 0.0
    assert got[1] < got[2]


@pytest.mark.parametrize('args', [
    (float('nan'), 1.0, 1.0, 1.0, 1.0, 1.0),
    (1.0, float('inf'), 1.0, 1.0, 1.0, 1.0),
    (-1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
    (1.0, 1.0, 0.0, 1.0, 1.0, 1.0),
    (1.0, 1.0, 1.0, 1.0, 1.0, 0.0),
    (1.0, 1.0, 1.0, 1.0, 0.0, 1.0),
])
@pytest.mark.parametrize('func', [mod.secure_rate_af, mod.secure_rate_df])
def test_rates_reject(func, args):
    with pytest.raises(ValueError):
        func(*args)


def test_check_mode():
    assert mod.check_mode('AF') == 'af'
    with pytest.raises(ValueError):
        mod.check_mode('cf')


def test_af_monotone_in_source_power():
    rng = np.random.default_rng(10)
    for _ in range(200):
        g_sr, g_re = rng.uniform(0.1, 3.0, 2)
        g_rm = g_re * rng.uniform(1.01, 5.0)
        pr = rng.uniform(0.01, 10.0)
        ps = np.sort(rng.uniform(0.0, 20.0, 50))
        rates = mod.secure_rate_af(ps, pr, g_sr, g_rm, g_re, 1.0)
        assert np.all(np.diff(rates) >= -1e-12)


def test_af_unimodal_in_relay_power():
    rng = np.random.default_rng(11)
    for _ in range(200):
        g_sr, g_re = rng.uniform(0.1, 3.0, 2)
        g_rm = g_re * rng.uniform(1.01, 5.0)
        ps = rng.uniform(0.01, 20.0)
        peak = optimal_relay_power(ps, g_sr, g_rm, g_re, 1.0)
        below = np.linspace(0.0, peak, 60)
        above = np.linspace(peak, 10 * peak, 60)
        r_below = mod.secure_rate_af(ps, below, g_sr, g_rm, g_re, 1.0)
        r_above = mod.secure_rate_af(ps, above, g_sr, g_rm, g_re, 1.0)
        assert np.all(np.diff(r_below) >= -1e-12)
        assert np.all(np.diff(r_above) <= 1e-12)


@pytest.mark.parametrize('func', [mod.secure_rate_af, mod.secure_rate_df])
def test_rates_zero_without_margin(func):
    rng = np.random.default_rng(12)
    ps = rng.uniform(0.0, 50.0, 100)
    pr = rng.uniform(0.0, 50.0, 100)
    g_sr = rng.uniform(0.1, 5.0, 100)
    g_rm = rng.uniform(0.1, 5.0, 100)
    g_re = g_rm * rng.uniform(1.0, 3.0, 100)
    assert np.all(func(ps, pr, g_sr, g_rm, g_re, 1.0) == 0.0)


def test_sum_secure_rate_uses_pairing():
    r, a = helpers.instance([2.0, 1.0], [[4.0, 3.0], [1.0, 1.0]])
    powers = PowerAllocation(np.array([1.0, 2.0]), np.array([1.0, 1.0]), 0.0, 0.0, mod.DF)
    straight = mod.sum_secure_rate(r, a, Pairing([0, 1]), powers, mod.DF)
    crossed = mod.sum_secure_rate(r, a, Pairing([1, 0]), powers, mod.DF)
    # pair (0 -> 0): min(2, 4) vs eav 1; pair (1 -> 1): min(2, 3) vs eav 1
    expected_straight = 0.5 * (math.log2(3.0) - 1.0) + 0.5 * (math.log2(3.0) - 1.0)
    # pair (0 -> 1): min(2, 3); pair (1 -> 0): min(2, 4)
    expected_crossed = expected_straight
    assert straight.sum == pytest.approx(expected_straight, rel=1e-13)
    assert crossed.sum == pytest.approx(expected_crossed, rel=1e-13)
    assert straight.per_subcarrier.shape == (2,)
    assert straight.sum == math.fsum(straight.per_subcarrier)

    af_straight = mod.sum_secure_rate(r, a, [0, 1], powers, mod.AF)
    af_crossed = mod.sum_secure_rate(r, a, [1, 0], powers, mod.AF)
    expected = mod.secure_rate_af(1.0, 1.0, 2.0, 3.0, 1.0, 1.0) + mod.secure_rate_af(2.0, 1.0, 1.0, 4.0, 1.0, 1.0)
    assert af_crossed.sum == pytest.approx(expected, rel=1e-13)
    assert af_crossed.per_subcarrier[0] == pytest.approx(mod.secure_rate_af(1.0, 1.0, 2.0, 3.0, 1.0, 1.0))
    # Same ps g_sr on both pairs, so swapping is rate-neutral here.
    assert af_straight.sum == pytest.approx(af_crossed.sum, rel=1e-13)


def test_sum_secure_rate_rejects():
    r, a = helpers.instance([2.0, 1.0], [[4.0, 3.0], [1.0, 1.0]])
    powers = PowerAllocation(np.ones(2), np.ones(2), 0.0, 0.0, mod.AF)
    with pytest.raises(ValueError):
        mod.sum_secure_rate(r, a, [0, 0], powers, mod.AF)
    with pytest.raises(ValueError):
        mod.sum_secure_rate(r, a, [0, 1], PowerAllocation(np.ones(3), np.ones(3), 0.0, 0.0, 'af'), mod.AF)
