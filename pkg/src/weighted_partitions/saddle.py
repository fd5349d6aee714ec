"""Saddle-point evaluation of the weighted partition generating function.

With ``rho = exp(-1/X)`` the moments

    Phi_m(X) = (rho d/drho)^m Phi_f(rho) = sum_n f(n) n^m K_m(n/X),

where ``K_m(t) = sum_k k^(m-1) e^(-k t)`` has the closed forms
``-log(1-q)``, ``q/(1-q)``, ``q/(1-q)^2``, ``q(1+q)/(1-q)^3`` (``q = e^-t``),
are evaluated with a certified truncation bound.  The saddle ``X`` solves
``Phi_1(X) = n``; all predictions are assembled in log space.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.optimize import brentq

from .constants import ConstantsBundle
from .errors import BudgetError, DomainError, SaddleError
from .numtheory import WeightFunction, build_sieve

DEFAULT_MAX_TERMS = 30_000_000
ZETA2 = math.pi**2 / 6
_MEISSEL_MERTENS = 0.26149721284764278


@dataclass(frozen=True)
class PhiEvaluation:
    X: float
    m: int
    value: float
    truncation_bound: float
    terms_used: int


@dataclass(frozen=True)
class SaddleSolution:
    n_target: int
    X: float
    rho: float
    phi0: PhiEvaluation
    phi1: PhiEvaluation
    phi2: PhiEvaluation
    residual: float
    bracket: tuple[float, float]


@dataclass(frozen=True)
class AsymptoticPrediction:
    """``formula_id`` is one of ``saddle``, ``leading``, ``leading_omega``, ``difference``."""

    n: int
    log_p_predicted: float
    p_predicted_leading: mpmath.mpf
    formula_id: str


# ---------------------------------------------------------------------------
# Series evaluation
# ---------------------------------------------------------------------------


class _ValueCache:
    """Floating weight values ``f(0..T)``, regrown by doubling when needed."""

    def __init__(self, f: WeightFunction):
        self.f = f
        self.values = np.zeros(1)

    def get(self, T: int) -> np.ndarray:
        if T >= self.values.size:
            limit = max(T, 2 * (self.values.size - 1), 1024)
            self.values = self.f.values_array(build_sieve(limit, max_limit=limit))
        return self.values[1 : T + 1]


_CACHES: dict[str, _ValueCache] = {}


def _values(f: WeightFunction, T: int) -> np.ndarray:
    key = f.content_hash
    if key not in _CACHES:
        _CACHES[key] = _ValueCache(f)
    return _CACHES[key].get(T)


def _kernel(m: int, t: np.ndarray) -> np.ndarray:
    q = np.exp(-t)
    one_minus_q = -np.expm1(-t)
    if m == 0:
        return -np.log1p(-q)
    if m == 1:
        return q / one_minus_q
    if m == 2:
        return q / one_minus_q**2
    if m == 3:
        return q * (1 + q) / one_minus_q**3
    raise DomainError(f"derivative order must be 0..3, got {m}")


def _upper_gamma_int(a: int, x: float) -> float:
    """Upper incomplete gamma ``Gamma(a, x)`` for integer ``a >= 1``."""
    term, total = 1.0, 1.0
    for i in range(1, a):
        term *= x / i
        total += term
    return math.factorial(a - 1) * math.exp(-x) * total


def phi_tail_bound(X: float, m: int, T: int, fmax: float) -> float:
    """Bound for the terms ``n > T`` of ``Phi_m(X)``.

    Uses ``f(n) <= fmax log2(n)``, ``K_m(t) <= c q / (1 - q_T)^max(m,1)`` for
    ``n >= T`` and ``log t <= t log(T)/T``, then compares the decreasing
    summand with its integral.  Requires ``T >= (m + 2) X``.
    """
    qT = math.exp(-T / X)
    c = 2.0 if m == 3 else 1.0
    kfac = c / (1.0 - qT) ** max(m, 1)
    integral = math.log(T) / T * X ** (m + 2) * _upper_gamma_int(m + 2, T / X)
    return fmax / math.log(2) * kfac * integral


def eval_phi(
    f: WeightFunction,
    X: float,
    m: int,
    tol: float = 1e-12,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> PhiEvaluation:
    """``Phi_m`` at ``rho = exp(-1/X)``; ``tol`` bounds the tail relative to the value."""
    if X <= 0:
        raise DomainError("X must be positive")
    if not 0 <= m <= 3:
        raise DomainError(f"derivative order must be 0..3, got {m}")
    f.require_nonnegative()
    fmax = f.require_bounded()
    if fmax == 0:
        return PhiEvaluation(X, m, 0.0, 0.0, 0)
    T = X * (math.log(1 / tol) + m * max(math.log(X), 0.0) + math.log(1 + fmax))
    T = int(math.ceil(max(T, (m + 2) * X + 3, 16)))
    partial = None
    while True:
        if T > max_terms:
            raise BudgetError(f"Phi_{m}(X={X}) needs more than {max_terms} terms", partial)
        vals = _values(f, T)
        n = np.arange(1, T + 1, dtype=float)
        value = math.fsum(vals * n**m * _kernel(m, n / X))
        partial = PhiEvaluation(X, m, value, phi_tail_bound(X, m, T, fmax), T)
        if partial.truncation_bound <= tol * abs(value):
            return partial
        T *= 2


# ---------------------------------------------------------------------------
# Saddle point
# ---------------------------------------------------------------------------


def _initial_X(f: WeightFunction, n: int, constants: ConstantsBundle | None) -> float:
    if constants is not None and constants.psi_f is not None:
        c_f, psi = float(constants.c_f), float(constants.psi_f)
    else:
        c = f.constant_default
        if c is None or callable(f.default) or not f.additive:
            c = 1.0
        c_f, psi = float(c) or 1.0, _MEISSEL_MERTENS
    level = math.log(math.log(n)) + psi if n > 3 else 0.0
    level = max(level, 0.5)
    return math.sqrt(n / (ZETA2 * c_f * level))


def solve_saddle(
    f: WeightFunction,
    n: int,
    tol: float = 1e-9,
    constants: ConstantsBundle | None = None,
    monotone_grid: int = 9,
) -> SaddleSolution:
    """Solve ``Phi_1(X) = n`` by bracketing and Brent's method in the ``X`` variable."""
    if n < 2:
        raise DomainError("saddle point needs n >= 2")
    phi_tol = min(tol * 1e-3, 1e-12)
    try:
        return _solve(f, n, tol, phi_tol, constants, monotone_grid)
    except SaddleError:
        return _solve(f, n, tol, phi_tol * 1e-3, constants, monotone_grid)


def _solve(f, n, tol, phi_tol, constants, monotone_grid) -> SaddleSolution:
    def g(X):
        return eval_phi(f, X, 1, phi_tol).value - n

    X0 = _initial_X(f, n, constants)
    lo, hi = X0 / 4, X0 * 4
    for _ in range(40):
        glo, ghi = g(lo), g(hi)
        if glo < 0 < ghi:
            break
        if glo >= 0:
            lo /= 4
        if ghi <= 0:
            hi *= 4
    else:
        raise SaddleError(f"could not bracket the saddle for n={n}")

    grid = np.geomspace(lo, hi, monotone_grid)
    vals = [g(x) for x in grid]
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise SaddleError(f"X -> rho Phi'(rho) not increasing on [{lo}, {hi}]")

    X = brentq(g, lo, hi, xtol=1e-15 * X0, rtol=4 * np.finfo(float).eps, maxiter=200)
    phi1 = eval_phi(f, X, 1, phi_tol)
    residual = abs(phi1.value - n)
    if residual > tol * n:
        raise SaddleError(f"saddle residual {residual} exceeds {tol * n}")
    phi0 = eval_phi(f, X, 0, phi_tol)
    phi2 = eval_phi(f, X, 2, phi_tol)
    return SaddleSolution(n, X, math.exp(-1 / X), phi0, phi1, phi2, residual, (lo, hi))


def solve_many(f: WeightFunction, ns, tol: float = 1e-9, constants=None,
               workers: int | None = None) -> list[SaddleSolution]:
    """Solve several targets; ``WPART_WORKERS`` sets the default thread count."""
    if workers is None:
        workers = int(os.environ.get("WPART_WORKERS", "1"))
    ns = list(ns)
    if ns:
        _values(f, 16)  # warm the shared value cache before threads start
    if workers <= 1:
        return [solve_saddle(f, n, tol, constants) for n in ns]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda n: solve_saddle(f, n, tol, constants), ns))


# ---------------------------------------------------------------------------
# Predictions
# ---------------------------------------------------------------------------


def _prediction(n, log_p, formula_id) -> AsymptoticPrediction:
    with mpmath.workdps(30):
        leading = mpmath.exp(mpmath.mpf(log_p))
    return AsymptoticPrediction(n, log_p, leading, formula_id)


def predict_saddle(sol: SaddleSolution) -> AsymptoticPrediction:
    """``rho^-n Psi_f(rho) / sqrt(2 pi Phi_2(rho))`` in log space."""
    if sol.phi2.value <= 0:
        raise SaddleError("second moment must be positive")
    log_p = sol.n_target / sol.X + sol.phi0.value - 0.5 * math.log(2 * math.pi * sol.phi2.value)
    return _prediction(sol.n_target, log_p, "saddle")


def predict_difference(sol: SaddleSolution) -> AsymptoticPrediction:
    """Saddle prediction for ``p(n+1) - p(n)``: the ``p(n)`` prediction times ``1/X``."""
    base = predict_saddle(sol)
    return _prediction(sol.n_target, base.log_p_predicted - math.log(sol.X), "difference")


def predict_leading(n: int, bundle: ConstantsBundle, which: str = "general") -> AsymptoticPrediction:
    """Closed-form leading asymptotic in ``n`` and ``log log n``.

    ``which="general"`` uses ``c_f`` and ``psi_f`` from the bundle;
    ``which="omega"`` uses ``c_f = 1`` and the Meissel-Mertens constant.
    The exponent carries an unquantified ``(1 + o(1))`` factor, so the result
    is only a trend target.
    """
    if n < 16:
        raise DomainError("leading asymptotic needs n >= 16")
    if which == "omega":
        c_f, psi = 1.0, float(bundle.meissel_mertens)
        formula = "leading_omega"
    elif which == "general":
        if bundle.psi_f is None:
            raise DomainError("psi_f undefined for this weight (c_f = 0)")
        c_f, psi = float(bundle.c_f), float(bundle.psi_f)
        formula = "leading"
    else:
        raise DomainError(f"unknown formula {which!r}")
    z2 = float(bundle.zeta2)
    level = math.log(math.log(n)) + psi
    if level <= 0:
        raise DomainError(f"log log n + psi_f = {level} is not positive")
    c1 = (z2 * c_f) ** 0.25 / math.sqrt(4 * math.pi)
    c2 = (z2 * c_f) ** 0.5
    log_p = math.log(c1) - 0.75 * math.log(n) + 0.25 * math.log(level) + c2 * math.sqrt(n * level)
    return _prediction(n, log_p, formula)


def leading_exponent_ratio(log_p: float, n: int, zeta2: float, psi: float, c_f: float = 1.0) -> float:
    """``log p(n) / (sqrt(zeta(2) c_f) sqrt(n (log log n + psi)))``."""
    return log_p / (math.sqrt(zeta2 * c_f) * math.sqrt(n * (math.log(math.log(n)) + psi)))


# ---------------------------------------------------------------------------
# Fundamental estimate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EstimateResidual:
    X: float
    m: int
    phi: float
    main_term: float
    r: float
    scaled: float  # r * log X


def fundamental_estimate_residuals(
    f: WeightFunction, X_grid, m: int, bundle: ConstantsBundle, tol: float = 1e-12
) -> list[EstimateResidual]:
    """Relative deviation of ``Phi_m`` from ``X^(m+1) zeta(2) m! c_f (log log X + psi_f + C_m/log X)``."""
    grid = [float(x) for x in X_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("X grid must be increasing")
    if grid and grid[0] < 10:
        raise DomainError("X grid must start at 10 or above")
    if bundle.psi_f is None:
        raise DomainError("psi_f undefined for this weight")
    c_f, psi = float(bundle.c_f), float(bundle.psi_f)
    z2 = float(bundle.zeta2)
    if m in bundle.C_m:
        cm = float(bundle.C_m[m])
    else:
        cm = float(sum(1 / k for k in range(1, m + 1)) + bundle.zeta_log_deriv_2)
    rows = []
    for X in grid:
        phi = eval_phi(f, X, m, tol).value
        L = math.log(X)
        main = X ** (m + 1) * z2 * math.factorial(m) * c_f * (math.log(L) + psi + cm / L)
        r = phi / main - 1
        rows.append(EstimateResidual(X, m, phi, main, r, r * L))
    return rows


# ---------------------------------------------------------------------------
# Comparison with exact tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    n: int
    p_exact: int
    p_saddle: float
    ratio_saddle: float
    p_leading: float
    log_ratio_leading: float


def _log(v) -> float:
    if isinstance(v, int):
        return math.log(v)
    return math.log(v.numerator) - math.log(v.denominator)


def compare_with_table(table, f: WeightFunction, ns, bundle: ConstantsBundle,
                       tol: float = 1e-9, which: str = "general") -> list[ComparisonRow]:
    """Join exact values with saddle and leading-order predictions."""
    rows = []
    for n in ns:
        if n > table.N:
            raise DomainError(f"n={n} beyond table size {table.N}")
        exact = table.p[n]
        log_exact = _log(exact)
        sol = solve_saddle(f, n, tol, bundle)
        pred = predict_saddle(sol)
        lead = predict_leading(n, bundle, which) if n >= 16 else None
        rows.append(
            ComparisonRow(
                n,
                exact,
                float(pred.p_predicted_leading),
                math.exp(pred.log_p_predicted - log_exact),
                float(lead.p_predicted_leading) if lead else float("nan"),
                (lead.log_p_predicted - log_exact) if lead else float("nan"),
            )
        )
    return rows
