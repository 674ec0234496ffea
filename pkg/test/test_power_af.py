import secure_relay_kit.power_af as mod
from secure_relay_kit.functional import db_to_linear
from secure_relay_kit.pairing import pair_af, pair_default
from secure_relay_kit.rates import AF, secure_rate_af, sum_secure_rate
import helpers
import math
import pytest

import numpy as np


def check_kkt(r, a, pairing, budgets, powers):
    a_, b_, c_ = (np.asarray(r.gain_sr), a.gain_rm[pairing.perm], a.gain_re[pairing.perm])
    ps, pr = powers.ps, powers.pr
    assert np.all(ps >= 0) and np.all(pr >= 0)
    assert powers.lam >= 0 and powers.mu >= 0
    assert ps.sum() == pytest.approx(budgets.P_S, rel=1e-8)
    assert pr.sum() <= budgets.P_R * (1 + 1e-8)
    pr_star = mod.optimal_relay_power(ps, a_, b_, c_, r.noise_variance)
    assert np.all(pr <= pr_star * (1 + 1e-8) + 1e-12)
    r_ps, r_pr = mod.stationarity_residuals(r, a, pairing, powers)
    scale = max(powers.lam, powers.mu, 1.0)
    assert np.max(np.abs(r_ps)) <= 1e-6 * scale
    assert np.max(np.abs(r_pr)) <= 1e-6 * scale
    assert abs(powers.mu * (pr.sum() - budgets.P_R)) <= 1e-6
    assert abs(powers.lam * (ps.sum() - budgets.P_S)) <= 1e-6


def test_optimal_relay_power_grid():
    g_sr, g_rm, g_re, ps = 0.8, 2.5, 0.6, 4.0
    peak = float(mod.optimal_relay_power(ps, g_sr, g_rm, g_re, 1.0))
    grid = np.linspace(0.0, 5 * peak, 10001)
    rates = secure_rate_af(ps, grid, g_sr, g_rm, g_re, 1.0)
    best = grid[np.argmax(rates)]
    assert best == pytest.approx(peak, abs=5 * peak / 10000)
    assert secure_rate_af(ps, peak, g_sr, g_rm, g_re, 1.0) >= rates.max() - 1e-12


@pytest.mark.parametrize('P_S,P_R', [(2.0, 100.0), (2.0, 0.3), (50.0, 1.0)])
def test_single_subcarrier(P_S, P_R):
    r, a = helpers.instance([1.3], [[2.0], [0.5]])
    budgets = mod.Budgets(P_S, P_R)
    powers = mod.solve_af(r, a, pair_default(1), budgets)
    assert powers.ps[0] == pytest.approx(P_S, rel=1e-10)
    pr_star = float(mod.optimal_relay_power(P_S, 1.3, 2.0, 0.5, 1.0))
    assert powers.pr[0] == pytest.approx(min(P_R, pr_star), rel=1e-8)
    assert powers.mode == AF


def test_relay_slack_uses_optimal_relay_power():
    r, a = helpers.instance([1.0, 0.4], [[2.0, 3.0], [0.5, 1.0]])
    powers = mod.solve_af(r, a, pair_default(2), mod.Budgets(10.0, 1e6))
    assert powers.mu == 0.0
    expected = mod.optimal_relay_power(powers.ps, r.gain_sr, a.gain_rm, a.gain_re, 1.0)
    assert np.all(powers.ps > 0)
    assert powers.pr == pytest.approx(expected, rel=1e-12)
    assert powers.ps.sum() == pytest.approx(10.0, rel=1e-8)


def test_relay_tight():
    r, a = helpers.instance([1.0, 0.4, 2.0], [[2.0, 3.0, 1.0], [0.5, 1.0, 0.2]])
    budgets = mod.Budgets(20.0, 0.5)
    pairing = pair_default(3)
    powers = mod.solve_af(r, a, pairing, budgets)
    assert powers.mu > 0
    assert powers.pr.sum() == pytest.approx(0.5, rel=1e-8)
    check_kkt(r, a, pairing, budgets, powers)


@pytest.mark.parametrize('seed', range(40))
def test_kkt_random(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(1, 7))
    r, a = helpers.random_instance(rng, N, M=int(rng.integers(2, 5)))
    budgets = mod.Budgets(db_to_linear(rng.uniform(0, 18)), db_to_linear(rng.uniform(0, 18)))
    pairing = pair_af(r, a)
    powers = mod.solve_af(r, a, pairing, budgets)
    check_kkt(r, a, pairing, budgets, powers)


def test_degenerate_pairs_get_no_power():
    r, a = helpers.instance([1.0, 2.0], [[2.0, 1.0], [0.5, 1.0]])
    assert a.gain_rm[1] == a.gain_re[1]
    powers = mod.solve_af(r, a, pair_default(2), mod.Budgets(5.0, 5.0))
    assert powers.ps[1] == 0.0 and powers.pr[1] == 0.0
    assert powers.ps[0] == pytest.approx(5.0, rel=1e-8)


def test_all_degenerate(caplog):
    r, a = helpers.instance([1.0, 2.0], [[1.0, 1.0], [1.0, 1.0]])
    powers = mod.solve_af(r, a, pair_default(2), mod.Budgets(5.0, 5.0))
    assert powers.ps.tolist() == [0.0, 0.0]
    assert powers.pr.tolist() == [0.0, 0.0]
    assert 'No subcarrier has a secure margin' in caplog.text


@pytest.mark.parametrize('budgets', [(0.0, 1.0), (1.0, -1.0), (float('inf'), 1.0), (1.0, float('nan'))])
def test_bad_budgets(budgets):
    r, a = helpers.instance([1.0], [[2.0], [1.0]])
    with pytest.raises(ValueError):
        mod.solve_af(r, a, pair_default(1), budgets)


def test_monotone_in_budgets():
    rng = np.random.default_rng(99)
    r, a = helpers.random_instance(rng, 4, M=3)
    pairing = pair_af(r, a)

    def rate(P_S, P_R):
        powers = mod.solve_af(r, a, pairing, mod.Budgets(P_S, P_R))
        return sum_secure_rate(r, a, pairing, powers, AF).sum
    levels = [db_to_linear(db) for db in range(0, 21, 4)]
    by_source = [rate(P, 4.0) for P in levels]
    by_relay = [rate(4.0, P) for P in levels]
    assert np.all(np.diff(by_source) >= -1e-9)
    assert np.all(np.diff(by_relay) >= -1e-9)


def numeric_operand(ps, pr, a, b, c, s):
    x = s + a * ps
    return (s + pr * b) * (x + pr * c) / ((s + pr * c) * (x + pr * b))


def half_log_rate(ps, pr, a, b, c, s):
    return 0.5 * math.log(numeric_operand(ps, pr, a, b, c, s))


def fd_hessian(f, ps, pr, h):
    f0 = f(ps, pr)
    d_ss = (f(ps + h, pr) - 2 * f0 + f(ps - h, pr)) / h ** 2
    d_rr = (f(ps, pr + h) - 2 * f0 + f(ps, pr - h)) / h ** 2
    d_sr = (f(ps + h, pr + h) - f(ps + h, pr - h) - f(ps - h, pr + h) + f(ps - h, pr - h)) / (4 * h * h)
    return d_ss, d_sr, d_rr


@pytest.mark.parametrize('point', [
    (3.0, 1.0, 1.0, 2.0, 1.0, 1.0),
    (0.7, 0.9, 2.0, 3.0, 0.5, 1.0),
    (5.0, 2.5, 0.3, 1.5, 1.2, 0.5),
])
def test_derivatives_match_finite_differences(point):
    ps, pr, a, b, c, s = point
    h = 1e-4

    def f(x, y):
        return half_log_rate(x, y, a, b, c, s)
    d_ps, d_pr = mod.rate_gradient(ps, pr, a, b, c, s)
    assert d_ps == pytest.approx((f(ps + h, pr) - f(ps - h, pr)) / (2 * h), rel=1e-6)
    assert d_pr == pytest.approx((f(ps, pr + h) - f(ps, pr - h)) / (2 * h), rel=1e-6, abs=1e-10)
    assert mod.rate_hessian(ps, pr, a, b, c, s) == pytest.approx(fd_hessian(f, ps, pr, h), rel=1e-4, abs=1e-7)

    def g(x, y):
        return numeric_operand(x, y, a, b, c, s)
    hess = mod.operand_hessian(ps, pr, a, b, c, s)
    assert (hess.d2_ps, hess.d2_ps_pr, hess.d2_pr) == pytest.approx(fd_hessian(g, ps, pr, h), rel=1e-4, abs=1e-7)
    assert hess.det == pytest.approx(hess.d2_ps * hess.d2_pr - hess.d2_ps_pr ** 2, rel=1e-7, abs=1e-12)


def test_operand_hessian_known_det():
    hess = mod.operand_hessian(3.0, 1.0, 1.0, 2.0, 1.0, 1.0)
    assert hess.det == pytest.approx(0.001688, rel=1e-3)


def test_operand_negative_semidefinite_on_region():
    rng = np.random.default_rng(2024)
    n = 0
    while n < 10000:
        s = rng.uniform(0.1, 2.0)
        a, c = rng.uniform(0.05, 5.0, 2)
        b = c * rng.uniform(1.0, 10.0)
        ps = rng.uniform(0.0, 30.0)
        lo = s / math.sqrt(b * c)
        hi = float(mod.optimal_relay_power(ps, a, b, c, s))
        if hi <= lo:
            continue
        pr = rng.uniform(lo, hi)
        hess = mod.operand_hessian(ps, pr, a, b, c, s)
        assert hess.d2_ps <= 0
        assert hess.d2_pr <= 0
        assert hess.det >= -1e-9
        n += 1


def test_supports_largest_first():
    got = [s.tolist() for s in mod._supports(3)]
    assert got == [[0, 1], [0, 2], [1, 2], [0], [1], [2]]


def test_starved_pair_is_dropped():
    # The relay-tight search drives one pair's source power to zero; the
    # remaining pairs fit within the relay budget.
    from secure_relay_kit.oracle import solve_power_bruteforce
    r, a = helpers.random_instance(np.random.default_rng(10034), 3)
    budgets = mod.Budgets(3.23, 2.82)
    pairing = pair_default(3)
    powers = mod.solve_af(r, a, pairing, budgets)
    check_kkt(r, a, pairing, budgets, powers)
    searched = solve_power_bruteforce(r, a, pairing, budgets, AF)
    got = sum_secure_rate(r, a, pairing, powers, AF).sum
    assert got >= sum_secure_rate(r, a, pairing, searched, AF).sum * (1 - 1e-4)


def test_relay_tight_kkt_many_instances():
    for seed in range(10000, 10400):
        rng = np.random.default_rng(seed)
        N = int(rng.integers(2, 9))
        r, a = helpers.random_instance(rng, N)
        budgets = mod.Budgets(db_to_linear(rng.uniform(0, 20)), db_to_linear(rng.uniform(0, 20)))
        pairing = pair_default(N)
        powers = mod.solve_af(r, a, pairing, budgets)
        check_kkt(r, a, pairing, budgets, powers)
