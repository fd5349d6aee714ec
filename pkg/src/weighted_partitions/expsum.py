"""Weyl sums with additive coefficients, rational approximation and arcs.

The checks here are empirical: they record observed ratios against the
bound shapes and only assert boundedness or trends over a finite grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, PreconditionError
from .numtheory import SieveTable, WeightFunction, build_sieve, euler_phi, mobius

GOLDEN = (math.sqrt(5) - 1) / 2
NAMED_THETAS = {
    "golden": GOLDEN,
    "sqrt2": math.sqrt(2) - 1,
    "pi": math.pi - 3,
}


@dataclass(frozen=True)
class RationalApproximation:
    theta: float
    a: int
    q: int
    beta: float
    Q_cap: int


@dataclass(frozen=True)
class ArcClassification:
    arc_class: str  # "major" or "minor"
    witness: tuple[int, int] | None
    Q: float
    P: float  # largest admissible denominator X/Q


@dataclass
class ExpSumReport:
    N: int
    theta: float
    value: complex
    approx: RationalApproximation
    normalized_ratio: float
    bound_ratio: float | None
    arc_class: str
    params: dict = field(default_factory=dict)
    note: str = ""


# ---------------------------------------------------------------------------
# Weyl sums
# ---------------------------------------------------------------------------


def _phases(n: np.ndarray, theta) -> np.ndarray:
    """``theta * n mod 1``, exact in the residues when ``theta`` is a Fraction."""
    if isinstance(theta, Fraction):
        a, q = theta.numerator, theta.denominator
        return ((a % q) * (n % q) % q) / q
    return np.mod(float(theta) * n, 1.0)


def weyl_sum(f: WeightFunction, N: int, theta, sieve: SieveTable | None = None) -> complex:
    """``S_f(N, theta) = sum_{n <= N} f(n) e(theta n)`` with ``e(x) = exp(2 pi i x)``."""
    if N < 1:
        raise DomainError("N must be positive")
    sieve = sieve if sieve is not None and sieve.limit >= N else build_sieve(max(N, 2))
    vals = f.values_array(sieve, N)[1:]
    n = np.arange(1, N + 1, dtype=np.int64)
    ang = 2 * np.pi * _phases(n, theta)
    c, s = np.cos(ang), np.sin(ang)
    if np.iscomplexobj(vals):
        re = vals.real * c - vals.imag * s
        im = vals.real * s + vals.imag * c
    else:
        re, im = vals * c, vals * s
    return complex(math.fsum(re), math.fsum(im))


# ---------------------------------------------------------------------------
# Rational approximation and arcs
# ---------------------------------------------------------------------------


def dirichlet_approx(theta, Q_cap: int) -> RationalApproximation:
    """Last continued-fraction convergent of ``theta mod 1`` with denominator ``<= Q_cap``.

    The convergent ``a/q`` satisfies ``q <= Q_cap`` and
    ``|theta - a/q| <= 1/(q Q_cap)``.  Float inputs are expanded exactly as
    binary rationals.
    """
    if Q_cap < 1:
        raise DomainError("Q_cap must be positive")
    x = Fraction(theta) % 1
    h0, h1 = 0, 1  # numerators
    k0, k1 = 1, 0  # denominators
    rest = x
    a, q = 0, 1
    while True:
        digit = rest.numerator // rest.denominator
        h0, h1 = h1, digit * h1 + h0
        k0, k1 = k1, digit * k1 + k0
        if k1 > Q_cap:
            break
        a, q = h1, k1
        frac = rest - digit
        if frac == 0:
            break
        rest = 1 / frac
    beta = float(x - Fraction(a, q))
    return RationalApproximation(float(x), a, q, beta, Q_cap)


def _major_threshold(X: float, A: float) -> tuple[float, float]:
    if X < 16 or A <= 0:
        raise DomainError("arcs need X >= 16 and A > 0")
    P = math.log(X) ** A
    return X / P, P


def classify_arc(theta, X: float, A: float) -> ArcClassification:
    """Major iff some ``a/q`` with ``q <= X/Q`` lies within ``1/(qQ)`` of theta,
    where ``Q = X (log X)^(-A)``.  Scans every admissible denominator."""
    Q, P = _major_threshold(X, A)
    x = Fraction(theta) % 1
    for q in range(1, int(math.floor(P)) + 1):
        a = round(x * q)
        if math.gcd(a, q) != 1:
            continue
        if abs(x - Fraction(a, q)) <= 1 / (q * Fraction(Q)):
            return ArcClassification("major", (a % q if q > 1 else 0, q), Q, P)
    return ArcClassification("minor", None, Q, P)


# ---------------------------------------------------------------------------
# Bound scans
# ---------------------------------------------------------------------------


def minor_arc_bound(N: int, R: float) -> float:
    """``N loglogN / logN + N loglogN (log R)^(3/2) / R^(1/2)`` with unit constant."""
    llN = math.log(math.log(N))
    return N * llN / math.log(N) + N * llN * math.log(R) ** 1.5 / math.sqrt(R)


def normalized_ratio(S: complex, N: int) -> float:
    return abs(S) * math.log(N) / (N * math.log(math.log(N)))


def minor_arc_bound_scan(
    f: WeightFunction,
    N_grid,
    theta_set,
    sieve: SieveTable | None = None,
    A: float = 2.0,
) -> list[ExpSumReport]:
    """``|S_f(N, theta)|`` against the two-term minor-arc bound for each pair.

    The rational approximation uses ``Q_cap = floor(sqrt N)`` so that
    ``|theta - a/q| <= 1/q^2``; ``R = min(q, N/q)``.  Pairs with ``R < 2``
    are reported with ``bound_ratio = None`` and a note.
    """
    N_grid = sorted(int(N) for N in N_grid)
    sieve = sieve if sieve is not None and sieve.limit >= N_grid[-1] else build_sieve(N_grid[-1])
    reports = []
    for theta in theta_set:
        for N in N_grid:
            S = weyl_sum(f, N, theta, sieve)
            approx = dirichlet_approx(theta, math.isqrt(N))
            R = min(approx.q, N / approx.q)
            note = ""
            if R >= 2:
                bound_ratio = abs(S) / minor_arc_bound(N, R)
            else:
                bound_ratio = None
                note = f"skipped: q={approx.q} violates 2 <= R <= q <= N/R"
            arc = classify_arc(theta, N, A)
            reports.append(
                ExpSumReport(
                    N, float(Fraction(theta) % 1), S, approx, normalized_ratio(S, N),
                    bound_ratio, arc.arc_class, {"A": A, "Q": arc.Q, "X": N, "R": R}, note,
                )
            )
    return reports


def trend_slope(xs, ys) -> float:
    """Least-squares slope of ``ys`` against ``log xs``."""
    lx = np.log(np.asarray(xs, dtype=float))
    y = np.asarray(ys, dtype=float)
    return float(np.polyfit(lx, y, 1)[0])


# ---------------------------------------------------------------------------
# Ramanujan-sum constant
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RamanujanCheck:
    q: int
    a: int
    K: int
    lhs: float
    rhs: float
    gap: float
    tail_bound: float


def ramanujan_sum_direct(q: int, a: int) -> complex:
    """``sum_{1<=l<=q, (l,q)=1} e(a l / q)`` by explicit summation."""
    ls = np.array([l for l in range(1, q + 1) if math.gcd(l, q) == 1], dtype=np.int64)
    ang = 2 * np.pi * ((a * ls) % q) / q
    return complex(math.fsum(np.cos(ang)), math.fsum(np.sin(ang)))


def ramanujan_constant_check(q: int, a: int = 1, K: int = 10**6, direct: bool = False,
                             sieve: SieveTable | None = None) -> RamanujanCheck:
    """Compare ``sum_k c_{q_k}(a_k) / (phi(q_k) k^2)`` with its closed form.

    Here ``q_k = q/(q,k)`` and ``a_k = a k/(q,k)``.  The inner sums take the
    closed form ``mu(q_k)`` (``(a_k, q_k) = 1``); ``direct=True`` sums them
    explicitly instead.  Only finitely many ``q_k`` occur (the divisors of
    ``q``), so each is computed once.  The tail beyond ``K`` is at most
    ``sum_{k>K} k^-2 < 1/K``.
    """
    if q < 1:
        raise DomainError("q must be positive")
    if math.gcd(a, q) != 1:
        raise PreconditionError(f"gcd(a, q) = {math.gcd(a, q)} != 1")
    sieve = sieve if sieve is not None and sieve.limit >= q else build_sieve(max(q, 2))
    k = np.arange(1, K + 1, dtype=np.int64)
    g = np.gcd(k, q)
    inner_by_g = {}
    for d in np.unique(g).tolist():
        qk = q // d
        if direct:
            # a_k is coprime to q_k, so the sum is the same for every k in
            # this class; evaluate it at the first such k.
            k0 = int(k[np.argmax(g == d)])
            c = ramanujan_sum_direct(qk, a * k0 // d).real
        else:
            c = mobius(qk, sieve) if qk > 1 else 1
        phi = euler_phi(qk, sieve) if qk > 1 else 1
        inner_by_g[d] = c / phi
    coeff = np.zeros(K)
    for d, v in inner_by_g.items():
        coeff[g == d] = v
    kf = k.astype(float)
    lhs = math.fsum(coeff / (kf * kf))
    omega_q = len(sieve.factorize(q)) if q > 1 else 0
    rad = math.prod(p for p, _ in sieve.factorize(q)) if q > 1 else 1
    rhs = (math.pi**2 / 6) * (-1) ** omega_q * rad / q**2
    return RamanujanCheck(q, a, K, lhs, rhs, abs(lhs - rhs), 1.0 / K)


# ---------------------------------------------------------------------------
# Sums in progressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProgressionCheck:
    N: int
    q: int
    ell: int
    lhs: float
    main_term: float
    residual: float
    q_in_range: bool


def progression_sum(f: WeightFunction, N: int, q: int, ell: int,
                    sieve: SieveTable | None = None) -> float:
    """``sum_{n <= N, n = ell mod q} f(n)`` (exact for integer weights)."""
    sieve = sieve if sieve is not None and sieve.limit >= N else build_sieve(max(N, 2))
    vals = f.values_array(sieve, N)
    start = ell % q or q
    sel = vals[start : N + 1 : q]
    if f.is_integer_valued:
        return float(int(np.rint(sel).astype(np.int64).sum()))
    return math.fsum(sel)


def fit_progression_constant(f: WeightFunction, N_grid, q: int, ell: int,
                             sieve: SieveTable | None = None) -> float:
    """Least-squares ``C(q)`` in ``lhs ~ (N/phi(q)) A_f(N) + N C(q)`` over the grid."""
    from .constants import PrimePartialSums

    N_grid = [int(N) for N in N_grid]
    sieve = sieve if sieve is not None and sieve.limit >= max(N_grid) else build_sieve(max(N_grid))
    sums = PrimePartialSums(f, sieve)
    phi = euler_phi(q, sieve) if q > 1 else 1
    num = den = 0.0
    for N in N_grid:
        lhs = progression_sum(f, N, q, ell, sieve)
        resid = lhs - N / phi * sums.A(N)
        num += N * resid
        den += N * N
    return num / den


def progression_sum_check(
    f: WeightFunction,
    N: int,
    q: int,
    ell: int,
    C_q: float = 0.0,
    A: float = 2.0,
    sieve: SieveTable | None = None,
) -> ProgressionCheck:
    """Exact progression sum against ``(N/phi(q)) A_f(N) + N C_q``."""
    from .constants import PrimePartialSums

    if math.gcd(ell, q) != 1:
        raise PreconditionError(f"gcd(ell, q) = {math.gcd(ell, q)} != 1")
    sieve = sieve if sieve is not None and sieve.limit >= N else build_sieve(max(N, 2))
    lhs = progression_sum(f, N, q, ell, sieve)
    phi = euler_phi(q, sieve) if q > 1 else 1
    main = N / phi * PrimePartialSums(f, sieve).A(N) + N * C_q
    in_range = q <= math.log(N) ** A if N > 1 else q == 1
    return ProgressionCheck(N, q, ell, lhs, main, lhs - main, in_range)
