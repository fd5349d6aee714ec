"""High-precision constants entering the partition asymptotics.

Everything here is evaluated with :mod:`mpmath` at ``DEFAULT_DPS`` decimal
digits and comes with an explicit truncation bound.

Sign convention
---------------
``D_f(s)`` denotes the nonnegative double sum
``sum_{k>=2} (1/k) sum_p f(p) p^(-k s)``.  With ``L_f(s) = G_f(s) - D_f(s)``
the constant in the fundamental estimate is ``psi_f = gamma - D_f(1)/c_f``,
which reduces to the Meissel-Mertens constant for ``f = omega``.  The signed
quantity ``-D_f(1)`` (about -0.3157 for omega) is exposed as ``D_f_1_signed``
so that ``psi_f = gamma + D_f_1_signed / c_f``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .errors import ConditionViolationError, DomainError
from .numtheory import SieveTable, WeightFunction, build_sieve

DEFAULT_DPS = 40
DEFAULT_TOL = 1e-30

mpf = mpmath.mpf


def _mp(x):
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


# ---------------------------------------------------------------------------
# Riemann zeta by Euler-Maclaurin
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def _zeta_em(s_str: str, dps: int, derivative: bool):
    with mpmath.workdps(dps + 15):
        s = mpf(s_str)
        if s <= 1:
            raise DomainError(f"zeta: need s > 1, got {s}")
        N = max(12, dps // 2)
        logN = mpmath.log(N)
        NS = mpf(N) ** (-s)
        if not derivative:
            value = mpmath.fsum(mpf(n) ** (-s) for n in range(1, N))
            value += N * NS / (s - 1) + NS / 2
        else:
            value = -mpmath.fsum(mpmath.log(n) * mpf(n) ** (-s) for n in range(2, N))
            value += -logN * N * NS / (s - 1) - N * NS / (s - 1) ** 2 - logN * NS / 2
        eps = mpf(10) ** (-dps - 5)
        poch = s  # rising factorial (s)_{2j-1}
        power = NS / N  # N^(1 - s - 2j) for j = 1
        harmonic = 1 / s  # sum_{i<2j-1} 1/(s+i)
        term = mpf(0)
        for j in range(1, 4 * dps + 40):
            coeff = mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j)
            term = coeff * poch * power
            if derivative:
                term *= harmonic - logN
            if abs(term) < eps * max(1, abs(value)):
                break
            value += term
            poch *= (s + 2 * j - 1) * (s + 2 * j)
            harmonic += 1 / (s + 2 * j - 1) + 1 / (s + 2 * j)
            power /= N * N
        # remainder of an alternating EM expansion for a completely monotone
        # summand is bounded by the first omitted term; doubled for slack
        bound = 2 * abs(term) + mpf(10) ** (-dps - 10)
        return +value, float(bound)


def zeta(s, dps: int = DEFAULT_DPS, full_output: bool = False):
    """Riemann zeta at real ``s > 1`` via Euler-Maclaurin summation."""
    value, bound = _zeta_em(mpmath.nstr(mpf(s), dps + 10), dps, False)
    return (value, bound) if full_output else value


def zeta_derivative(s, dps: int = DEFAULT_DPS, full_output: bool = False):
    """``zeta'(s)`` at real ``s > 1`` from the differentiated Euler-Maclaurin formula."""
    value, bound = _zeta_em(mpmath.nstr(mpf(s), dps + 10), dps, True)
    return (value, bound) if full_output else value


def euler_gamma(dps: int = DEFAULT_DPS):
    with mpmath.workdps(dps):
        return +mpmath.euler


# ---------------------------------------------------------------------------
# Prime zeta and related series
# ---------------------------------------------------------------------------


def _mobius_small(k: int) -> int:
    result, n, d = 1, k, 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            result = -result
        d += 1
    return -result if n > 1 else result


def _exp2_tail(s, K):
    """Bound for sum_{k>K} (1/k) * 3 * 2^(-k s), using zeta(sigma)-1 <= 3*2^-sigma (sigma >= 2)."""
    return 3.0 * 2.0 ** (-(K + 1) * s) / ((K + 1) * (1.0 - 2.0 ** (-s)))


def prime_zeta(s, tol: float = DEFAULT_TOL, dps: int = DEFAULT_DPS, full_output: bool = False):
    """Sum of ``p^(-s)`` over primes, for real ``s > 1``.

    Uses ``P(s) = sum_k mu(k)/k log zeta(k s)``.  With ``full_output`` the
    certified error bound is returned as well.
    """
    s_f = float(s)
    if s_f <= 1:
        raise DomainError(f"prime zeta has a logarithmic singularity at 1; got s={s}")
    K = 1
    while _exp2_tail(s_f, K) > tol / 2:
        K += 1
    with mpmath.workdps(dps + 10):
        s = mpf(s)
        total = mpf(0)
        err = _exp2_tail(s_f, K)
        for k in range(1, K + 1):
            mu = _mobius_small(k)
            if mu == 0:
                continue
            z, zb = zeta(k * s, dps, full_output=True)
            total += mpf(mu) / k * mpmath.log(z)
            err += zb / float(z) / k
    with mpmath.workdps(dps):
        value = +total
    return (value, err) if full_output else value


def froberg_sum(s=1, tol: float = DEFAULT_TOL, dps: int = DEFAULT_DPS, full_output: bool = False):
    """``sum_{k>=2} P(k s)/k`` for real ``s >= 1`` (about 0.3157 at ``s = 1``)."""
    s_f = float(s)
    if s_f < 1:
        raise DomainError("only s >= 1 is supported")
    K = 2
    while _exp2_tail(s_f, K) > tol / 2:
        K += 1
    with mpmath.workdps(dps + 10):
        total = mpf(0)
        err = _exp2_tail(s_f, K)
        for k in range(2, K + 1):
            v, b = prime_zeta(k * mpf(s), tol / (2 * K), dps, full_output=True)
            total += v / k
            err += b / k
    with mpmath.workdps(dps):
        value = +total
    return (value, err) if full_output else value


def D_f(s, f: WeightFunction, tol: float = DEFAULT_TOL, dps: int = DEFAULT_DPS,
        sieve: SieveTable | None = None, full_output: bool = False):
    """Nonnegative double sum ``sum_{k>=2} (1/k) sum_p f(p) p^(-k s)``.

    Constant defaults with finitely many exceptions are evaluated in closed
    form through :func:`froberg_sum`.  A callable default falls back to a
    direct prime sum over ``sieve`` with tail bound ``sup|f(p)| / (2 L)``.
    """
    if float(s) < 1:
        raise DomainError("D_f is only evaluated for s >= 1")
    f.require_bounded()
    c = f.constant_default
    if not callable(f.default):
        c = 0 if c is None else c
        with mpmath.workdps(dps + 10):
            s_mp = mpf(s)
            value, err = mpf(0), 0.0
            if c != 0:
                fr, err = froberg_sum(s_mp, tol, dps, full_output=True)
                value = _mp(c) * fr
                err *= abs(float(c))
            elif f.default is None:
                # no default: every prime must be listed, which a finite dict cannot do
                raise ConditionViolationError(
                    f"weight {f.name!r} is undefined at unlisted primes"
                )
            for p, v in f.prime_value.items():
                x = mpf(p) ** (-s_mp)
                value += (_mp(v) - _mp(c)) * (-mpmath.log1p(-x) - x)
        with mpmath.workdps(dps):
            value = +value
        return (value, err) if full_output else value
    if sieve is None:
        raise DomainError("a sieve is required for weights with a callable default")
    primes = sieve.primes.astype(float)
    fp = f.prime_values_array(sieve)[sieve.primes]
    x = primes ** (-float(s))
    inner = -np.log1p(-x) - x
    value = mpf(math.fsum(fp * inner))
    err = f.require_bounded() / (2.0 * sieve.limit) + 1e-15 * float(abs(value))
    return (value, err) if full_output else value


# ---------------------------------------------------------------------------
# Averages of f over primes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CfEstimate:
    """``P_f(N)/pi(N)`` at ``N/4``, ``N/2`` and ``N``."""

    value: float
    N: int
    trend: list[tuple[int, float]]

    @property
    def spread(self) -> float:
        vals = [v for _, v in self.trend]
        return max(vals) - min(vals)


def c_f_estimate(f: WeightFunction, N: int, sieve: SieveTable | None = None) -> CfEstimate:
    """Average of ``f(p)`` over primes ``p <= N`` with a convergence trail."""
    sieve = sieve or build_sieve(max(N, 2))
    if N > sieve.limit:
        raise DomainError(f"N={N} beyond sieve limit {sieve.limit}")
    sums = PrimePartialSums(f, sieve)
    trend = []
    for M in (max(N // 4, 2), max(N // 2, 2), N):
        trend.append((M, sums.P(M) / sieve.prime_count(M)))
    return CfEstimate(trend[-1][1], N, trend)


class PrimePartialSums:
    """Partial sums of ``f(p)``, ``f(p)/p`` and ``f(p)^2/p`` over sieved primes."""

    def __init__(self, f: WeightFunction, sieve: SieveTable):
        self.f = f
        self.sieve = sieve
        self.primes = sieve.primes
        self.fp = f.prime_values_array(sieve)[self.primes]

    def _k(self, N: int) -> int:
        if N > self.sieve.limit:
            raise DomainError(f"N={N} beyond sieve limit {self.sieve.limit}")
        return int(np.searchsorted(self.primes, N, side="right"))

    def P(self, N: int) -> float:
        return math.fsum(self.fp[: self._k(N)])

    def A(self, N: int) -> float:
        k = self._k(N)
        return math.fsum(self.fp[:k] / self.primes[:k])

    def B(self, N: int) -> float:
        k = self._k(N)
        return math.sqrt(math.fsum(self.fp[:k] ** 2 / self.primes[:k]))


def A_f(f: WeightFunction, N: int, sieve: SieveTable) -> float:
    return PrimePartialSums(f, sieve).A(N)


def P_f(f: WeightFunction, N: int, sieve: SieveTable) -> float:
    return PrimePartialSums(f, sieve).P(N)


def B_f(f: WeightFunction, N: int, sieve: SieveTable) -> float:
    return PrimePartialSums(f, sieve).B(N)


# ---------------------------------------------------------------------------
# Meissel-Mertens and the C_m constants
# ---------------------------------------------------------------------------


def meissel_mertens(tol: float = DEFAULT_TOL, dps: int = DEFAULT_DPS, full_output: bool = False):
    """``M = gamma - sum_{k>=2} P(k)/k``."""
    fr, err = froberg_sum(1, tol, dps, full_output=True)
    with mpmath.workdps(dps):
        value = euler_gamma(dps) - fr
    return (value, err) if full_output else value


def meissel_mertens_direct(sieve: SieveTable, dps: int = DEFAULT_DPS):
    """``gamma + sum_p (log(1-1/p) + 1/p)`` summed over sieved primes.

    The primes beyond the sieve are replaced by the smooth density
    ``dt/log t``; the returned bound ``4.5/(L log^3 L)`` covers that
    replacement using ``|pi(t) - li(t)| <= 3 t/log^3 t`` (valid for ``t >= 10^5``).
    Returns ``(value, bound)``.
    """
    L = sieve.limit
    if L < 100_000:
        raise DomainError("direct Meissel-Mertens sum needs a sieve of at least 10^5")
    x = 1.0 / sieve.primes.astype(float)
    head = math.fsum(np.log1p(-x) + x)
    with mpmath.workdps(dps):
        g = lambda t: (mpmath.log1p(-1 / t) + 1 / t) / mpmath.log(t)  # noqa: E731
        tail = mpmath.quad(g, [L + 0.5, 10 * L, mpmath.inf])
        value = euler_gamma(dps) + mpf(head) + tail
    logL = math.log(L)
    bound = 4.5 / (L * logL**3) + 1e-15
    return value, bound


def harmonic_number(m: int) -> Fraction:
    return sum((Fraction(1, k) for k in range(1, m + 1)), Fraction(0))


def zeta_log_derivative_2(dps: int = DEFAULT_DPS, full_output: bool = False):
    """``zeta'(2)/zeta(2)``."""
    z, zb = zeta(2, dps, full_output=True)
    d, db = zeta_derivative(2, dps, full_output=True)
    with mpmath.workdps(dps):
        value = d / z
    bound = db / float(z) + abs(float(d)) * zb / float(z) ** 2
    return (value, bound) if full_output else value


def C_m(m: int, dps: int = DEFAULT_DPS, full_output: bool = False):
    """``digamma(m+1) + gamma + zeta'(2)/zeta(2)``, i.e. ``H_m + zeta'(2)/zeta(2)``."""
    if m < 0:
        raise DomainError("m must be nonnegative")
    v, b = zeta_log_derivative_2(dps, full_output=True)
    with mpmath.workdps(dps):
        value = _mp(harmonic_number(m)) + v
    return (value, b) if full_output else value


# ---------------------------------------------------------------------------
# Bundle
# ---------------------------------------------------------------------------


@dataclass
class ConstantsBundle:
    """Every scalar entering the asymptotic formulas, with truncation bounds.

    ``c_f_certified`` is False when ``c_f`` comes from a finite prime average;
    its bound is then the spread of the convergence trail, a diagnostic only.
    """

    weight_id: str
    gamma: object
    zeta2: object
    zeta_log_deriv_2: object
    c_f: object
    D_f_1: object
    psi_f: object
    C_m: dict[int, object]
    meissel_mertens: object
    truncation_error_bounds: dict[str, float] = field(default_factory=dict)
    c_f_certified: bool = True
    meissel_mertens_direct: object = None

    @property
    def D_f_1_signed(self):
        return -self.D_f_1

    def as_floats(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if isinstance(v, mpmath.mpf):
                out[k] = float(v)
            elif isinstance(v, dict) and k == "C_m":
                out[k] = {int(m): float(x) for m, x in v.items()}
            else:
                out[k] = v
        return out

    def to_json(self, digits: int = 30, **extra) -> str:
        def entry(name, v):
            return {
                "value": float(v),
                "digits": mpmath.nstr(v, digits) if isinstance(v, mpmath.mpf) else repr(v),
                "error_bound": self.truncation_error_bounds.get(name),
            }

        scalars = ["gamma", "zeta2", "zeta_log_deriv_2", "c_f", "D_f_1", "psi_f",
                   "meissel_mertens"]
        payload = {"weight_id": self.weight_id, **extra}
        for name in scalars:
            v = getattr(self, name)
            payload[name] = None if v is None else entry(name, v)
        payload["D_f_1_signed"] = None if self.D_f_1 is None else float(-self.D_f_1)
        payload["c_f_certified"] = self.c_f_certified
        payload["C_m"] = {
            str(m): entry(f"C_{m}", v) for m, v in sorted(self.C_m.items())
        }
        if self.meissel_mertens_direct is not None:
            payload["meissel_mertens_direct"] = entry(
                "meissel_mertens_direct", self.meissel_mertens_direct
            )
        return json.dumps(payload, indent=2, sort_keys=False)


def build_constants(
    f: WeightFunction,
    tol: float = DEFAULT_TOL,
    dps: int = DEFAULT_DPS,
    sieve: SieveTable | None = None,
    m_values=(0, 1, 2, 3),
    direct_check: bool = False,
) -> ConstantsBundle:
    """Assemble a :class:`ConstantsBundle` for ``f``.

    ``sieve`` is needed for weights with a callable default (prime averages)
    and for ``direct_check``, which also evaluates the slow Meissel-Mertens
    prime sum for comparison.
    """
    f.require_nonnegative()
    bounds: dict[str, float] = {}
    gamma = euler_gamma(dps)
    bounds["gamma"] = 10.0 ** (-dps)
    z2, bounds["zeta2"] = zeta(2, dps, full_output=True)
    zl, bounds["zeta_log_deriv_2"] = zeta_log_derivative_2(dps, full_output=True)
    M, bounds["meissel_mertens"] = meissel_mertens(tol, dps, full_output=True)

    certified = True
    if callable(f.default):
        if sieve is None:
            raise DomainError("a sieve is required to estimate c_f for this weight")
        est = c_f_estimate(f, sieve.limit, sieve)
        c_f = mpf(est.value)
        bounds["c_f"] = est.spread
        certified = False
    else:
        c = f.constant_default
        if c is None:
            raise ConditionViolationError(f"weight {f.name!r} undefined at unlisted primes")
        c_f = _mp(c)
        bounds["c_f"] = 0.0

    D1, bounds["D_f_1"] = D_f(1, f, tol, dps, sieve=sieve, full_output=True)
    with mpmath.workdps(dps):
        if c_f > 0:
            psi = gamma - D1 / c_f
            bounds["psi_f"] = bounds["D_f_1"] / float(c_f) + bounds["gamma"] + (
                float(D1) * bounds["c_f"] / float(c_f) ** 2
            )
        else:
            psi = None
    cms = {}
    for m in m_values:
        cms[m], bounds[f"C_{m}"] = C_m(m, dps, full_output=True)

    direct = None
    if direct_check:
        if sieve is None:
            raise DomainError("direct_check needs a sieve")
        direct, bounds["meissel_mertens_direct"] = meissel_mertens_direct(sieve, dps)

    return ConstantsBundle(
        weight_id=f.name,
        gamma=gamma,
        zeta2=z2,
        zeta_log_deriv_2=zl,
        c_f=c_f,
        D_f_1=D1,
        psi_f=psi,
        C_m=cms,
        meissel_mertens=M,
        truncation_error_bounds=bounds,
        c_f_certified=certified,
        meissel_mertens_direct=direct,
    )
