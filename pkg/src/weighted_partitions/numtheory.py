"""Sieve-backed arithmetic primitives and strongly additive weight functions.

A :class:`SieveTable` stores the smallest prime factor of every integer up to
its limit, so factorising ``n`` costs ``O(log n)`` divisions.  A
:class:`WeightFunction` describes a strongly additive ``f`` through its values
on primes; ``f(n)`` is the sum of ``f(p)`` over the distinct primes ``p | n``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterator, Mapping, Union

import numpy as np

from .errors import (
    ConditionViolationError,
    DomainError,
    SieveSizeError,
    UndefinedWeightError,
)

Number = Union[int, Fraction, float, complex]

#: Largest sieve limit accepted by default (int64 table of ~1.6 GB is refused).
DEFAULT_MAX_SIEVE = 200_000_000


# ---------------------------------------------------------------------------
# Sieve
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SieveTable:
    """Smallest-prime-factor table for ``1..limit``.

    ``smallest_prime_factor[n]`` equals ``n`` exactly when ``n`` is prime;
    index 0 holds 0 and index 1 holds 1.
    """

    limit: int
    smallest_prime_factor: np.ndarray = field(repr=False)

    @cached_property
    def primes(self) -> np.ndarray:
        idx = np.arange(self.limit + 1)
        mask = (self.smallest_prime_factor == idx) & (idx >= 2)
        return idx[mask]

    def prime_count(self, n: int) -> int:
        """pi(n) for ``n <= limit``."""
        self._check(max(n, 1))
        return int(np.searchsorted(self.primes, n, side="right"))

    def is_prime(self, n: int) -> bool:
        self._check(n)
        return n >= 2 and int(self.smallest_prime_factor[n]) == n

    def factorize(self, n: int) -> list[tuple[int, int]]:
        """Prime factorisation of ``n`` as ``[(p, e), ...]`` with ``p`` increasing."""
        self._check(n)
        spf = self.smallest_prime_factor
        out: list[tuple[int, int]] = []
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out

    def distinct_primes(self, n: int) -> list[int]:
        return [p for p, _ in self.factorize(n)]

    def _check(self, n: int) -> None:
        if n < 1 or n > self.limit:
            raise DomainError(f"{n} outside sieve range 1..{self.limit}")


def build_sieve(limit: int, max_limit: int = DEFAULT_MAX_SIEVE) -> SieveTable:
    """Build the smallest-prime-factor table up to ``limit``."""
    limit = int(limit)
    if limit < 2:
        raise SieveSizeError(f"sieve limit must be at least 2, got {limit}")
    if limit > max_limit:
        raise SieveSizeError(f"sieve limit {limit} exceeds memory budget {max_limit}")
    dtype = np.int32 if limit < 2**31 else np.int64
    spf = np.zeros(limit + 1, dtype=dtype)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    idx = np.arange(limit + 1, dtype=dtype)
    unset = spf == 0
    spf[unset] = idx[unset]
    spf[1] = 1
    return SieveTable(limit, spf)


def is_prime(n: int) -> bool:
    """Trial-division primality test for values outside any sieve."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


# ---------------------------------------------------------------------------
# Classical multiplicative functions
# ---------------------------------------------------------------------------


def omega(n: int, sieve: SieveTable) -> int:
    """Number of distinct prime factors of ``n``."""
    if n < 1:
        raise DomainError(f"omega undefined at {n}")
    return len(sieve.factorize(n))


def euler_phi(q: int, sieve: SieveTable) -> int:
    result = q
    for p, _ in sieve.factorize(q):
        result -= result // p
    return result


def mobius(n: int, sieve: SieveTable) -> int:
    fac = sieve.factorize(n)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def radical(q: int, sieve: SieveTable) -> int:
    return math.prod(p for p, _ in sieve.factorize(q))


def divisors(n: int, sieve: SieveTable) -> list[int]:
    divs = [1]
    for p, e in sieve.factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


# ---------------------------------------------------------------------------
# Weight functions
# ---------------------------------------------------------------------------


def _normalize(value) -> Number:
    """Keep exact inputs exact: ints stay ints, rationals become Fractions."""
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    if isinstance(value, str):
        text = value.strip()
        try:
            return _normalize(Fraction(text))
        except ValueError:
            pass
        try:
            return float(text)
        except ValueError:
            return complex(text.replace("i", "j"))
    if isinstance(value, complex):
        return value
    return float(value)


def _abs(value: Number) -> float:
    return float(abs(value))


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """A weight ``f`` on the positive integers, described by its prime values.

    Parameters
    ----------
    name:
        Identifier used in manifests and reports (``"omega"``, ``"file:w.txt"``).
    prime_value:
        Explicit values ``f(p)``.
    default:
        Value for primes missing from ``prime_value``: a constant, a callable
        ``p -> f(p)``, or ``None`` (missing primes are an error).
    prime_bound:
        Upper bound for ``|f(p)|``.  Derived automatically unless ``default``
        is a callable, in which case it must be supplied for any computation
        that needs the growth condition ``f(p) = O(1)``.
    additive:
        ``True`` for strongly additive ``f``.  ``False`` gives the weight
        supported on the primes only (``f(n) = 0`` for composite ``n``), which
        models partitions restricted to prime parts.
    """

    name: str
    prime_value: Mapping[int, Number] = field(default_factory=dict)
    default: Number | Callable[[int], Number] | None = None
    prime_bound: float | None = None
    additive: bool = True

    def __post_init__(self):
        values = {int(p): _normalize(v) for p, v in dict(self.prime_value).items()}
        object.__setattr__(self, "prime_value", values)
        if self.default is not None and not callable(self.default):
            object.__setattr__(self, "default", _normalize(self.default))
        if self.prime_bound is None and not callable(self.default):
            vals = [_abs(v) for v in values.values()]
            if self.default is not None:
                vals.append(_abs(self.default))
            object.__setattr__(self, "prime_bound", max(vals, default=0.0))

    # -- identity -----------------------------------------------------------

    @cached_property
    def content_hash(self) -> str:
        """SHA-256 over a canonical description of the values."""
        if callable(self.default):
            default = f"callable:{getattr(self.default, '__qualname__', repr(self.default))}"
        else:
            default = repr(self.default)
        body = "|".join(
            [
                "additive" if self.additive else "prime-supported",
                default,
                ";".join(f"{p}={v!r}" for p, v in sorted(self.prime_value.items())),
            ]
        )
        return hashlib.sha256(body.encode()).hexdigest()

    @property
    def is_integer_valued(self) -> bool:
        vals = list(self.prime_value.values())
        if callable(self.default):
            return False
        if self.default is not None:
            vals.append(self.default)
        return all(isinstance(v, int) for v in vals)

    @property
    def is_real(self) -> bool:
        vals = list(self.prime_value.values())
        if self.default is not None and not callable(self.default):
            vals.append(self.default)
        return not any(isinstance(v, complex) for v in vals)

    @property
    def constant_default(self) -> Number | None:
        """The default value when it is a constant, else ``None``."""
        return None if callable(self.default) else self.default

    def scaled(self, factor: int | Fraction, name: str | None = None) -> "WeightFunction":
        """Return ``factor * f``."""
        factor = _normalize(factor)
        default = self.default
        if callable(default):
            inner = default
            default = lambda p: factor * inner(p)  # noqa: E731
        elif default is not None:
            default = factor * default
        bound = None if self.prime_bound is None else self.prime_bound * abs(factor)
        return WeightFunction(
            name or f"{factor}*{self.name}",
            {p: factor * v for p, v in self.prime_value.items()},
            default,
            bound,
            self.additive,
        )

    # -- evaluation ---------------------------------------------------------

    def at_prime(self, p: int) -> Number:
        try:
            return self.prime_value[p]
        except KeyError:
            pass
        if self.default is None:
            raise UndefinedWeightError(f"weight {self.name!r} undefined at prime {p}")
        return _normalize(self.default(p)) if callable(self.default) else self.default

    def require_bounded(self) -> float:
        """Return ``sup |f(p)|`` or raise if no bound is known."""
        if self.prime_bound is None or not math.isfinite(self.prime_bound):
            raise ConditionViolationError(
                f"weight {self.name!r} has no finite bound on its prime values"
            )
        return float(self.prime_bound)

    def require_nonnegative(self) -> None:
        if not self.is_real:
            raise ConditionViolationError(f"weight {self.name!r} is complex-valued")
        bad = [p for p, v in self.prime_value.items() if v < 0]
        d = self.constant_default
        if bad or (d is not None and d < 0):
            raise ConditionViolationError(f"weight {self.name!r} takes negative values")

    def prime_values_array(self, sieve: SieveTable, limit: int | None = None) -> np.ndarray:
        """Array ``fp`` indexed by integers ``0..limit`` with ``fp[p] = f(p)`` at primes."""
        limit = sieve.limit if limit is None else limit
        primes = sieve.primes[sieve.primes <= limit]
        dtype = float if self.is_real else complex
        fp = np.zeros(limit + 1, dtype=dtype)
        if callable(self.default):
            fp[primes] = [complex(self.at_prime(int(p))) if dtype is complex
                          else float(self.at_prime(int(p))) for p in primes]
        else:
            if self.default is not None:
                fp[primes] = self.default
            else:
                missing = [int(p) for p in primes if int(p) not in self.prime_value]
                if missing:
                    raise UndefinedWeightError(
                        f"weight {self.name!r} undefined at prime {missing[0]}"
                    )
            for p, v in self.prime_value.items():
                if p <= limit:
                    fp[p] = v
        return fp

    def values_array(self, sieve: SieveTable, limit: int | None = None) -> np.ndarray:
        """Floating values ``f(0..limit)`` with ``f(0) = f(1) = 0``."""
        limit = sieve.limit if limit is None else limit
        if limit > sieve.limit:
            raise DomainError(f"limit {limit} exceeds sieve limit {sieve.limit}")
        fp = self.prime_values_array(sieve, limit)
        if not self.additive:
            return fp
        out = np.zeros(limit + 1, dtype=fp.dtype)
        for p in sieve.primes[sieve.primes <= limit].tolist():
            out[p::p] += fp[p]
        return out

    def exact_values(self, sieve: SieveTable, limit: int) -> list:
        """Exact values ``f(0..limit)`` as ints or Fractions (floats converted exactly)."""
        if limit > sieve.limit:
            raise DomainError(f"limit {limit} exceeds sieve limit {sieve.limit}")
        out: list = [0] * (limit + 1)
        cache: dict[int, Number] = {}

        def fp(p: int):
            if p not in cache:
                v = self.at_prime(p)
                if isinstance(v, complex):
                    raise ConditionViolationError("exact values need a real weight")
                cache[p] = Fraction(v) if isinstance(v, float) else v
            return cache[p]

        for n in range(2, limit + 1):
            if self.additive:
                out[n] = sum(fp(p) for p in sieve.distinct_primes(n))
            elif sieve.is_prime(n):
                out[n] = fp(n)
        return [_normalize(v) if isinstance(v, Fraction) else v for v in out]


def eval_weight(f: WeightFunction, n: int, sieve: SieveTable) -> Number:
    """``f(n)``: the sum of ``f(p)`` over the distinct primes dividing ``n``."""
    if n < 1:
        raise DomainError(f"weight undefined at {n}")
    if not f.additive:
        return f.at_prime(n) if sieve.is_prime(n) else 0
    total: Number = 0
    for p in sieve.distinct_primes(n):
        total = total + f.at_prime(p)
    return total


# ---------------------------------------------------------------------------
# Registry and file loading
# ---------------------------------------------------------------------------


def omega_weight() -> WeightFunction:
    return WeightFunction("omega", default=1)


def constant_weight(c: Number) -> WeightFunction:
    c = _normalize(c)
    return WeightFunction(f"const:{c}", default=c)


def indicator_weight(primes) -> WeightFunction:
    """Strongly additive weight counting prime factors from a given set."""
    ps = sorted({int(p) for p in primes})
    bad = [p for p in ps if not is_prime(p)]
    if bad:
        raise DomainError(f"indicator set contains non-primes: {bad}")
    return WeightFunction("indicator:" + ",".join(map(str, ps)), {p: 1 for p in ps}, default=0)


def prime_indicator_weight() -> WeightFunction:
    """``f(n) = 1`` when ``n`` is prime, else 0: partitions into prime parts."""
    return WeightFunction("prime-indicator", default=1, additive=False)


def _parse_weight_lines(lines: Iterator[str], source: str):
    values: dict[int, Number] = {}
    default = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DomainError(f"{source}:{lineno}: expected 'p value', got {raw.strip()!r}")
        key, value = parts
        if key == "default":
            default = _normalize(value)
            continue
        p = int(key)
        if not is_prime(p):
            raise DomainError(f"{source}:{lineno}: {p} is not prime")
        values[p] = _normalize(value)
    return values, default


def load_weight_file(path: str | Path) -> WeightFunction:
    """Read a weight from a text file of ``p value`` lines.

    A line ``default VALUE`` sets the value at unlisted primes; ``#`` starts a
    comment.  Values may be integers, fractions (``3/2``), decimals or complex
    literals.
    """
    path = Path(path)
    with path.open() as fh:
        values, default = _parse_weight_lines(fh, str(path))
    return WeightFunction(f"file:{path.name}", values, default)


def resolve_weight(spec: str) -> WeightFunction:
    """Look up a weight by registry name.

    Accepted forms: ``omega``, ``const:C``, ``indicator:2,3,5``,
    ``prime-indicator`` and ``file:PATH``.
    """
    if spec == "omega":
        return omega_weight()
    if spec == "prime-indicator":
        return prime_indicator_weight()
    kind, _, arg = spec.partition(":")
    if kind == "const" and arg:
        return constant_weight(arg)
    if kind == "indicator" and arg:
        return indicator_weight(int(x) for x in arg.split(",") if x.strip())
    if kind == "file" and arg:
        return load_weight_file(arg)
    raise DomainError(f"unknown weight {spec!r}")
