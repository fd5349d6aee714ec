import json
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from weighted_partitions.constants import (
    A_f,
    B_f,
    C_m,
    D_f,
    P_f,
    build_constants,
    c_f_estimate,
    euler_gamma,
    froberg_sum,
    harmonic_number,
    meissel_mertens,
    prime_zeta,
    zeta,
    zeta_derivative,
    zeta_log_derivative_2,
)
from weighted_partitions.errors import ConditionViolationError, DomainError
from weighted_partitions.numtheory import WeightFunction, build_sieve, constant_weight, omega_weight

M = 0.2614972128476428
FROBERG = 0.3157184520538901


@pytest.fixture(scope="module")
def sieve_1e6():
    return build_sieve(10**6)


@pytest.mark.parametrize("s", [2, 3, 4.5, 6])
def test_zeta_matches_mpmath(s):
    v, bound = zeta(s, full_output=True)
    with mpmath.workdps(40):
        assert abs(v - mpmath.zeta(s)) < max(bound, mpmath.mpf(10) ** -35)
        assert abs(zeta_derivative(s) - mpmath.zeta(s, derivative=1)) < mpmath.mpf(10) ** -30


def test_prime_zeta_examples():
    assert float(prime_zeta(2)) == pytest.approx(0.45224742, abs=5e-9)
    assert float(prime_zeta(4)) == pytest.approx(0.07699313, abs=1e-8)
    assert prime_zeta(3) < zeta(3) - 1
    with pytest.raises(DomainError):
        prime_zeta(1)


@pytest.mark.parametrize("s", [2, 3, 4, 6])
def test_prime_zeta_matches_direct_sum(sieve_1e6, s):
    L = sieve_1e6.limit
    direct = math.fsum(sieve_1e6.primes.astype(float) ** (-s))
    tail = L ** (1 - s) / (s - 1)  # sum over n > L of n^-s bounds the prime tail
    v = float(prime_zeta(s))
    assert direct <= v <= direct + tail + 1e-15


def test_prime_zeta_bound_respected_when_tightened():
    loose, bound = prime_zeta(2, tol=1e-12, full_output=True)
    tight = prime_zeta(2, tol=1e-30)
    assert abs(loose - tight) <= bound


def test_froberg_and_meissel_mertens():
    assert float(froberg_sum()) == pytest.approx(FROBERG, abs=1e-15)
    m, bound = meissel_mertens(full_output=True)
    assert float(m) == pytest.approx(M, abs=1e-15)
    assert bound < 1e-25
    assert float(euler_gamma() - m) == pytest.approx(0.3157184521, abs=1e-10)


def test_mertens_partial_product_over_small_primes():
    total = sum(math.log(1 - 1 / p) + 1 / p for p in range(2, 101)
                if all(p % d for d in range(2, p)))
    assert abs(total - (M - float(euler_gamma()))) < 0.006


def test_D_f_examples():
    assert float(D_f(1, omega_weight())) == pytest.approx(FROBERG, abs=1e-15)
    zero = WeightFunction("zero", default=0)
    assert D_f(1, zero) == 0
    two_only = WeightFunction("two", {2: 1}, default=0)
    assert float(D_f(1, two_only)) == pytest.approx(math.log(2) - 0.5, abs=1e-15)


def test_D_f_requires_bounded_weight():
    with pytest.raises(ConditionViolationError):
        D_f(1, WeightFunction("grow", default=lambda p: p))


def test_D_f_callable_default_matches_closed_form(sieve_1e6):
    f = WeightFunction("one", default=lambda p: 1, prime_bound=1)
    v, bound = D_f(1, f, sieve=sieve_1e6, full_output=True)
    assert abs(float(v) - FROBERG) <= bound


def test_c_f_estimates(sieve_1e6):
    assert c_f_estimate(omega_weight(), 1000, sieve_1e6).value == 1
    assert c_f_estimate(constant_weight(2), 10**5, sieve_1e6).value == 2
    f = WeightFunction("one-plus", default=lambda p: 1 + 1 / p, prime_bound=1.5)
    est = c_f_estimate(f, 10**6, sieve_1e6)
    assert 1 < est.value < 1.0001
    # the trail moves towards 1
    vals = [v for _, v in est.trend]
    assert vals == sorted(vals, reverse=True)


def test_C_m_values():
    c0 = float(C_m(0))
    assert c0 == pytest.approx(-0.5699609930945328, abs=1e-14)
    assert float(C_m(1)) == pytest.approx(1 + c0, abs=1e-14)
    assert float(C_m(3) - C_m(2)) == pytest.approx(1 / 3, abs=1e-14)
    assert harmonic_number(3) == Fraction(11, 6)
    z2p = -0.9375482543158437
    assert float(zeta_log_derivative_2()) == pytest.approx(z2p / (math.pi**2 / 6), abs=1e-14)


def test_partial_sums(sieve_1e6):
    w = omega_weight()
    assert A_f(w, 10, sieve_1e6) == pytest.approx(1 / 2 + 1 / 3 + 1 / 5 + 1 / 7, abs=1e-15)
    assert B_f(w, 1000, sieve_1e6) ** 2 == pytest.approx(A_f(w, 1000, sieve_1e6), rel=1e-14)
    assert P_f(w, 100, sieve_1e6) == 25
    assert abs(A_f(w, 10**6, sieve_1e6) - (math.log(math.log(10**6)) + M)) < 0.02


def test_mertens_difference_bounded():
    s = build_sieve(10**7)
    w = omega_weight()
    diffs = [A_f(w, N, s) - (math.log(math.log(N)) + M) for N in (10**3, 10**4, 10**5, 10**6, 10**7)]
    assert max(abs(d) for d in diffs) < 0.02


def test_partial_sums_nondecreasing(sieve_1e6):
    w = constant_weight("1/2")
    vals = [A_f(w, N, sieve_1e6) for N in range(2, 2000, 37)]
    assert np.all(np.diff(vals) >= 0)


def test_bundle_for_omega():
    b = build_constants(omega_weight())
    assert float(b.c_f) == 1
    assert float(b.psi_f) == pytest.approx(float(b.meissel_mertens), abs=1e-8)
    assert float(b.D_f_1_signed) == pytest.approx(-FROBERG, abs=1e-15)
    assert set(b.C_m) == {0, 1, 2, 3}
    for name in ("gamma", "zeta2", "zeta_log_deriv_2", "D_f_1", "psi_f", "meissel_mertens"):
        assert name in b.truncation_error_bounds
    payload = json.loads(b.to_json())
    assert payload["meissel_mertens"]["value"] == pytest.approx(M, abs=1e-12)
    assert payload["meissel_mertens"]["digits"].startswith("0.26149721284764278375")
    with mpmath.workdps(40):
        for m, v in b.C_m.items():
            assert abs(v - (mpmath.harmonic(m) + mpmath.zeta(2, derivative=1) / mpmath.zeta(2))) < 1e-35
        assert abs(b.psi_f - mpmath.mertens) <= b.truncation_error_bounds["psi_f"]


def test_bundle_for_scaled_weight():
    b = build_constants(constant_weight(2))
    assert float(b.c_f) == 2
    # psi is unchanged by scaling f
    assert float(b.psi_f) == pytest.approx(M, abs=1e-12)


def test_bundle_zero_weight_has_no_psi():
    b = build_constants(WeightFunction("zero", default=0))
    assert b.psi_f is None
