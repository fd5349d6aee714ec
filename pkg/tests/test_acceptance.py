"""Acceptance criteria 1-10, each at its stated tolerance.

Run alone with ``pytest tests/test_acceptance.py -v``; the terminal summary
lists one PASS/FAIL line per criterion.
"""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from weighted_partitions.constants import (
    euler_gamma,
    meissel_mertens,
    meissel_mertens_direct,
    build_constants,
)
from weighted_partitions.exact import (
    brute_force_oracle,
    difference_table,
    partition_table,
    recurrence_residuals,
)
from weighted_partitions.expsum import (
    GOLDEN,
    dirichlet_approx,
    normalized_ratio,
    ramanujan_constant_check,
    trend_slope,
    weyl_sum,
)
from weighted_partitions.numtheory import (
    build_sieve,
    constant_weight,
    omega_weight,
    prime_indicator_weight,
)
from weighted_partitions.saddle import (
    ZETA2,
    fundamental_estimate_residuals,
    leading_exponent_ratio,
    predict_difference,
    predict_saddle,
    solve_saddle,
)

OMEGA = omega_weight()
MEISSEL_MERTENS = 0.2614972128476428


def _log_int(v: int) -> float:
    shift = max(v.bit_length() - 900, 0)
    return math.log(v >> shift) + shift * math.log(2)


@pytest.fixture(scope="module")
def omega_table():
    return partition_table(OMEGA, 10_001)


@pytest.fixture(scope="module")
def big_sieve():
    return build_sieve(10**7)


def test_criterion_01_oracle_equivalence(criterion):
    t = time.perf_counter()
    mismatches = [
        N for N in range(0, 121)
        if partition_table(OMEGA, N).p != brute_force_oracle(OMEGA, N).p
    ]
    p6 = partition_table(OMEGA, 6).p[6]
    elapsed = time.perf_counter() - t
    ok = not mismatches and p6 == 5 and elapsed < 10
    criterion(1, ok, f"recurrence == oracle for N<=120, p(6)={p6}, {elapsed:.1f}s")
    assert ok


@pytest.mark.slow
def test_criterion_02_recurrence_residuals(criterion, omega_table):
    t = time.perf_counter()
    weights = {"omega": omega_table}
    for f in (constant_weight(2), prime_indicator_weight()):
        weights[f.name] = partition_table(f, 10_000)
    nonzero = {}
    for name, table in weights.items():
        res = recurrence_residuals(table)[:10_000]
        nonzero[name] = sum(1 for r in res if r != 0)
    elapsed = time.perf_counter() - t
    ok = all(v == 0 for v in nonzero.values()) and elapsed < 300
    criterion(2, ok, f"nonzero residuals {nonzero} for n<=10^4, {elapsed:.0f}s")
    assert ok


def test_criterion_03_meissel_mertens(criterion, big_sieve):
    t = time.perf_counter()
    fast = meissel_mertens()
    direct, bound = meissel_mertens_direct(big_sieve)
    gap = abs(float(fast - direct))
    froberg = float(euler_gamma() - fast)
    elapsed = time.perf_counter() - t
    ok = gap < 1e-9 and round(froberg, 4) == 0.3157 and elapsed < 30
    criterion(3, ok, f"|M_series - M_direct|={gap:.2e} (direct bound {bound:.1e}), "
                     f"gamma-M={froberg:.10f}, {elapsed:.1f}s")
    assert ok


def test_criterion_04_ramanujan_identity(criterion):
    t = time.perf_counter()
    K = 10**6
    sieve = build_sieve(200)
    worst, failures = 0.0, []
    for q in range(1, 201):
        chk = ramanujan_constant_check(q, 1, K, sieve=sieve)
        worst = max(worst, chk.gap)
        if chk.gap > chk.tail_bound + 1e-10:
            failures.append(q)
    anchors = {
        1: ZETA2,
        2: -ZETA2 / 2,
        4: -ZETA2 / 8,
    }
    anchor_ok = all(
        abs(ramanujan_constant_check(q, 1, K, sieve=sieve).rhs - v) < 1e-15
        and abs(ramanujan_constant_check(q, 1, K, sieve=sieve).lhs - v) <= 1 / K + 1e-10
        for q, v in anchors.items()
    )
    elapsed = time.perf_counter() - t
    ok = not failures and anchor_ok and elapsed < 60
    criterion(4, ok, f"q<=200: worst gap {worst:.2e} vs tail 1e-06, failures {failures}, "
                     f"anchors {'ok' if anchor_ok else 'bad'}, {elapsed:.1f}s")
    assert ok


@pytest.mark.slow
def test_criterion_05_saddle_prediction(criterion, omega_table):
    t = time.perf_counter()
    ns = range(500, 10_001)
    dev = {}
    for n in ns:
        sol = solve_saddle(OMEGA, n)
        ratio = math.exp(predict_saddle(sol).log_p_predicted - _log_int(omega_table[n]))
        dev[n] = ratio - 1
    inside = all(-0.5 < d < 0.5 for d in dev.values())
    bottom = np.mean([abs(dev[n]) for n in ns if n <= 1000])
    top = np.mean([abs(dev[n]) for n in ns if n > 1000])
    elapsed = time.perf_counter() - t
    ok = inside and top < bottom and elapsed < 900
    criterion(5, ok, f"ratio in (0.5,1.5) for all n in [500,10^4]: {inside}; "
                     f"mean|r-1| [500,10^3]={bottom:.2e}, (10^3,10^4]={top:.2e}, {elapsed:.0f}s")
    assert ok


def test_criterion_06_leading_exponent_trend(criterion, omega_table):
    ratios = {
        n: leading_exponent_ratio(_log_int(omega_table[n]), n, ZETA2, MEISSEL_MERTENS)
        for n in (1000, 10_000)
    }
    in_band = 0.7 < ratios[10_000] < 1.1
    closer = abs(ratios[10_000] - 1) < abs(ratios[1000] - 1)
    ok = in_band and closer
    criterion(6, ok, f"exponent ratio n=10^3: {ratios[1000]:.4f}, n=10^4: {ratios[10_000]:.4f} "
                     f"(band (0.7,1.1): {in_band}, closer to 1: {closer})")
    assert ok


def test_criterion_07_fundamental_estimate(criterion):
    t = time.perf_counter()
    bundle = build_constants(OMEGA)
    grid = [1e2, 1e3, 1e4, 1e5]
    detail, ok = [], True
    for m in (0, 1, 2):
        scaled = [r.scaled for r in fundamental_estimate_residuals(OMEGA, grid, m, bundle)]
        sup = max(abs(s) for s in scaled)
        slope = trend_slope(grid, [abs(s) for s in scaled])
        # bounded: recorded sup below 1; no growth: |r log X| does not increase in trend
        ok &= sup < 1.0 and slope <= 0
        detail.append(f"m={m} sup|r logX|={sup:.3f} slope={slope:+.4f}")
    elapsed = time.perf_counter() - t
    ok &= elapsed < 300
    criterion(7, ok, "; ".join(detail) + f", {elapsed:.1f}s")
    assert ok


def test_criterion_08_saddle_solver(criterion):
    t = time.perf_counter()
    worst = 0.0
    for n in np.unique(np.round(np.geomspace(100, 1e8, 50)).astype(np.int64)).tolist():
        sol = solve_saddle(OMEGA, n)  # raises if the monotone bracket check fails
        worst = max(worst, sol.residual / n)
    elapsed = time.perf_counter() - t
    ok = worst <= 1e-6 and elapsed < 120
    criterion(8, ok, f"max residual/n over 50 targets in [10^2,10^8]: {worst:.1e}, {elapsed:.1f}s")
    assert ok


def test_criterion_09_weyl_sums(criterion):
    t = time.perf_counter()
    s0 = weyl_sum(OMEGA, 10, Fraction(0))
    s_half = weyl_sum(OMEGA, 10, Fraction(1, 2))
    exact_ok = s0 == complex(11, 0) and s_half.real == 3 and abs(s_half.imag) < 1e-12

    rng = random.Random(20240101)
    dirichlet_bad = 0
    for _ in range(10_000):
        theta = rng.random()
        Q = rng.randint(1, 10**6)
        r = dirichlet_approx(theta, Q)
        if not (1 <= r.q <= Q and abs(Fraction(theta) - Fraction(r.a, r.q)) <= Fraction(1, r.q * Q)):
            dirichlet_bad += 1

    Ns = [1000, 3162, 10_000, 31_623, 100_000, 316_228, 1_000_000]
    sieve = build_sieve(Ns[-1])
    ratios = [normalized_ratio(weyl_sum(OMEGA, N, GOLDEN, sieve), N) for N in Ns]
    sup = max(ratios)
    slope = trend_slope(Ns, ratios)
    elapsed = time.perf_counter() - t
    ok = exact_ok and dirichlet_bad == 0 and sup < 0.1 and slope <= 0 and elapsed < 180
    criterion(9, ok, f"S(10,0)={s0.real:g}, S(10,1/2)={s_half.real:g}, Dirichlet failures "
                     f"{dirichlet_bad}/10^4, golden ratio sup {sup:.4f} slope {slope:+.5f}, {elapsed:.1f}s")
    assert ok


def test_criterion_10_difference_function(criterion, omega_table):
    diffs = difference_table(omega_table)
    rel = {}
    for n in (1000, 10_000):
        pred = predict_difference(solve_saddle(OMEGA, n)).log_p_predicted
        rel[n] = math.exp(pred - _log_int(diffs[n])) - 1
    ok = abs(rel[1000]) < 0.35 and abs(rel[10_000]) < abs(rel[1000])
    criterion(10, ok, f"relative error of p(n+1)-p(n) prediction: n=10^3 {rel[1000]:+.4f}, "
                      f"n=10^4 {rel[10_000]:+.4f}")
    assert ok
