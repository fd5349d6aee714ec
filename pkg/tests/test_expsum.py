import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weighted_partitions.errors import PreconditionError
from weighted_partitions.expsum import (
    GOLDEN,
    NAMED_THETAS,
    classify_arc,
    dirichlet_approx,
    fit_progression_constant,
    minor_arc_bound_scan,
    progression_sum,
    progression_sum_check,
    ramanujan_constant_check,
    ramanujan_sum_direct,
    trend_slope,
    weyl_sum,
)
from weighted_partitions.numtheory import WeightFunction, build_sieve, mobius, omega_weight

OMEGA = omega_weight()
ZERO = WeightFunction("zero", default=0)
ZETA2 = math.pi**2 / 6
M = 0.2614972128476428


@pytest.fixture(scope="module")
def sieve():
    return build_sieve(10**6)


def test_weyl_sum_examples(sieve):
    assert weyl_sum(OMEGA, 10, Fraction(0), sieve) == 11
    half = weyl_sum(OMEGA, 10, Fraction(1, 2), sieve)
    assert half.real == 3 and abs(half.imag) < 1e-12
    assert weyl_sum(OMEGA, 10, 0.5, sieve) == pytest.approx(3)
    assert weyl_sum(ZERO, 100, GOLDEN, sieve) == 0


def test_weyl_sum_symmetries(sieve):
    N = 10_000
    s = weyl_sum(OMEGA, N, GOLDEN, sieve)
    shifted = weyl_sum(OMEGA, N, GOLDEN + 1, sieve)
    mirrored = weyl_sum(OMEGA, N, -GOLDEN, sieve)
    assert abs(shifted) == pytest.approx(abs(s), rel=1e-10)
    assert mirrored == pytest.approx(s.conjugate(), rel=1e-10)
    assert abs(s) <= sum(OMEGA.values_array(sieve, N))


def test_weyl_sum_complex_weight(sieve):
    f = WeightFunction("c", {2: 1j}, default=0)
    # only even n carry weight i, so S(N, 0) = i * floor(N/2)
    assert weyl_sum(f, 11, Fraction(0), sieve) == 5j


def test_weyl_sum_decomposes_over_residue_classes(sieve):
    N, a, q = 5000, 3, 7
    total = sum(cmath.exp(2j * math.pi * a * ell / q) * progression_sum(OMEGA, N, q, ell, sieve)
                for ell in range(q))
    assert weyl_sum(OMEGA, N, Fraction(a, q), sieve) == pytest.approx(total, rel=1e-12)


def test_dirichlet_examples():
    r = dirichlet_approx(math.pi, 100)
    assert (r.a, r.q) == (1, 7)
    r = dirichlet_approx(Fraction(1, 3), 100)
    assert (r.a, r.q, r.beta) == (1, 3, 0.0)
    assert dirichlet_approx(GOLDEN, 100).q == 89
    assert dirichlet_approx(math.pi, 200).q == 113


@settings(max_examples=500, deadline=None)
@given(st.floats(0, 1, exclude_max=True), st.integers(2, 10**7))
def test_dirichlet_inequalities(theta, Q):
    r = dirichlet_approx(theta, Q)
    assert math.gcd(r.a, r.q) == 1
    assert 1 <= r.q <= Q
    assert abs(Fraction(theta) - Fraction(r.a, r.q)) <= Fraction(1, r.q * Q)


def _brute_force_arc(theta, X, A):
    P = math.log(X) ** A
    Q = X / P
    x = Fraction(theta) % 1
    for q in range(1, int(P) + 1):
        for a in range(0, q + 1):
            if math.gcd(a, q) == 1 and abs(x - Fraction(a, q)) <= 1 / (q * Fraction(Q)):
                return True
    return False


def test_classify_arc_examples():
    zero = classify_arc(0.0, 1e4, 2)
    assert zero.arc_class == "major" and zero.witness == (0, 1)
    # 34/55 lies within 1/(55 Q) of the golden ratio at X = 10^4, A = 2
    g2 = classify_arc(GOLDEN, 1e4, 2)
    assert g2.arc_class == "major" and g2.witness == (34, 55)
    assert classify_arc(GOLDEN, 1e4, 1).arc_class == "minor"
    for X in (16, 100, 1e4, 1e8):
        for A in (1, 2):
            assert classify_arc(Fraction(1, 2), X, A).arc_class == "major"


@pytest.mark.parametrize("theta", [GOLDEN, NAMED_THETAS["sqrt2"], NAMED_THETAS["pi"], 0.123456])
@pytest.mark.parametrize("X,A", [(1e4, 1), (1e4, 2), (1e6, 1.5)])
def test_classify_arc_matches_exhaustive_scan(theta, X, A):
    assert (classify_arc(theta, X, A).arc_class == "major") == _brute_force_arc(theta, X, A)


def test_minor_arc_scan_zero_weight(sieve):
    reports = minor_arc_bound_scan(ZERO, [1000, 10_000], [GOLDEN], sieve)
    assert all(r.normalized_ratio == 0 and r.bound_ratio == 0 for r in reports)


@pytest.mark.parametrize("name", ["golden", "sqrt2"])
def test_minor_arc_scan_bounded_with_decreasing_trend(sieve, name):
    Ns = [1000, 3162, 10_000, 31_623, 100_000, 316_228, 1_000_000]
    reports = minor_arc_bound_scan(OMEGA, Ns, [NAMED_THETAS[name]], sieve)
    ratios = [r.normalized_ratio for r in reports]
    assert max(ratios) < 0.05
    assert trend_slope(Ns, ratios) < 0
    assert all(r.bound_ratio is not None and r.bound_ratio < 0.01 for r in reports)


def test_minor_arc_scan_skips_small_R(sieve):
    (r,) = minor_arc_bound_scan(OMEGA, [1000], [0.0], sieve)
    assert r.bound_ratio is None and "skipped" in r.note


def test_ramanujan_sum_direct():
    for q in range(1, 40):
        assert ramanujan_sum_direct(q, 1).real == pytest.approx(mobius(q, build_sieve(40)) if q > 1 else 1,
                                                                abs=1e-9)


@pytest.mark.parametrize("q,value", [(1, ZETA2), (2, -ZETA2 / 2), (4, -ZETA2 / 8)])
def test_ramanujan_anchors(q, value):
    chk = ramanujan_constant_check(q, 1, 10**5)
    assert chk.rhs == pytest.approx(value, abs=1e-15)
    assert chk.gap <= chk.tail_bound + 1e-10


@pytest.mark.parametrize("q", [3, 6, 9, 12, 30, 49, 50])
def test_ramanujan_direct_mode_agrees(q):
    closed = ramanujan_constant_check(q, 1, 10**4)
    direct = ramanujan_constant_check(q, 1, 10**4, direct=True)
    assert direct.lhs == pytest.approx(closed.lhs, abs=1e-12)
    assert closed.gap <= closed.tail_bound + 1e-10


def test_ramanujan_other_residues():
    for a in (1, 5, 7, 11):
        chk = ramanujan_constant_check(12, a, 10**4)
        assert chk.gap <= chk.tail_bound + 1e-10


def test_ramanujan_requires_coprime():
    with pytest.raises(PreconditionError):
        ramanujan_constant_check(6, 2, 1000)


def test_progression_examples(sieve):
    assert progression_sum(OMEGA, 10, 2, 1, sieve) == 4
    assert progression_sum(ZERO, 1000, 3, 1, sieve) == 0
    with pytest.raises(PreconditionError):
        progression_sum_check(OMEGA, 1000, 6, 3, sieve=sieve)


def test_progression_full_range_matches_mertens():
    s = build_sieve(10**7)
    scaled = []
    for N in (10**3, 10**4, 10**5, 10**6, 10**7):
        lhs = progression_sum(OMEGA, N, 1, 0, s)
        scaled.append((lhs / N - math.log(math.log(N)) - M) * math.log(N))
    assert max(abs(v) for v in scaled) < 1


def test_progression_fitted_constant(sieve):
    grid = [10**4, 10**5, 10**6]
    C = fit_progression_constant(OMEGA, grid, 3, 1, sieve)
    assert math.isfinite(C)
    rows = [progression_sum_check(OMEGA, N, 3, 1, C, sieve=sieve) for N in grid]
    assert all(r.q_in_range for r in rows)
    assert max(abs(r.residual) / r.N for r in rows) < 0.1
    assert np.isclose(rows[0].main_term + rows[0].residual, rows[0].lhs)
