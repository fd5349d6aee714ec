"""Exact weighted partition counts.

``p_f(n)`` is the coefficient of ``z^n`` in ``prod_n (1 - z^n)^(-f(n))``.
Writing the log of the product as ``sum_j (a_j / j) z^j`` with
``a_j = sum_{d | j} d f(d)`` gives the recurrence

    n p(n) = sum_{j=1}^{n} a_j p(n - j),

which :func:`partition_table` runs in exact integer (or rational) arithmetic.
:func:`brute_force_oracle` multiplies the geometric-series factors directly
and shares no code with the recurrence.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from operator import mul
from pathlib import Path

from .errors import BudgetError, DomainError, OracleInapplicableError, PreconditionError
from .numtheory import SieveTable, WeightFunction, build_sieve

log = logging.getLogger(__name__)

#: Largest table size computed without an explicit override.
DEFAULT_MAX_N = 200_000

CHECKPOINT_MAGIC = b"WPTB"
CHECKPOINT_VERSION = 1
_FLAG_RATIONAL = 1


@dataclass
class LogSeriesCoefficients:
    """``a[j] = sum_{d | j} d f(d)`` for ``j = 0..N`` (``a[0] = 0``)."""

    N: int
    a: list
    weight_id: str

    def c(self, j: int) -> Fraction:
        """Coefficient of ``z^j`` in the log of the generating product."""
        return Fraction(self.a[j], j)


@dataclass
class PartitionTable:
    N: int
    p: list
    weight_id: str
    weight_hash: str
    coefficients: LogSeriesCoefficients | None = field(default=None, repr=False)

    @property
    def is_integral(self) -> bool:
        return all(isinstance(v, int) for v in self.p)

    def __getitem__(self, n: int):
        return self.p[n]


def _sieve_for(N: int, sieve: SieveTable | None) -> SieveTable:
    if sieve is not None and sieve.limit >= N:
        return sieve
    return build_sieve(max(N, 2))


def log_series_coefficients(
    f: WeightFunction, N: int, sieve: SieveTable | None = None
) -> LogSeriesCoefficients:
    """Exact ``a_j`` for ``j <= N`` in ``O(N log N)`` additions."""
    if N < 0:
        raise DomainError("N must be nonnegative")
    values = f.exact_values(_sieve_for(N, sieve), N) if N >= 2 else [0] * (N + 1)
    a: list = [0] * (N + 1)
    for d in range(1, N + 1):
        v = values[d]
        if v:
            step = d * v
            for j in range(d, N + 1, d):
                a[j] += step
    return LogSeriesCoefficients(N, a, f.name)


def partition_table(
    f: WeightFunction,
    N: int,
    sieve: SieveTable | None = None,
    max_n: int = DEFAULT_MAX_N,
) -> PartitionTable:
    """Exact ``p_f(0..N)`` via the log-derivative recurrence."""
    if N > max_n:
        raise BudgetError(f"N={N} exceeds the table budget {max_n}")
    coeffs = log_series_coefficients(f, N, sieve)
    a = coeffs.a
    integral = all(isinstance(v, int) for v in a)
    p: list = [1] + [0] * N
    for n in range(1, N + 1):
        s = sum(map(mul, a[1 : n + 1], p[n - 1 :: -1]))
        if integral:
            q, r = divmod(s, n)
            if r:
                # integer weights always give integer counts
                raise ArithmeticError(f"non-integral p({n}) = {s}/{n}")
            p[n] = q
        else:
            v = Fraction(s) / n
            p[n] = v.numerator if v.denominator == 1 else v
    return PartitionTable(N, p, f.name, f.content_hash, coeffs)


def brute_force_oracle(f: WeightFunction, N: int, sieve: SieveTable | None = None,
                       max_n: int = 200) -> PartitionTable:
    """Colored-partition count by repeated multiplication with ``1/(1 - z^n)``.

    Part ``n`` comes in ``f(n)`` colors, so each factor ``(1 - z^n)^(-f(n))``
    is applied as ``f(n)`` passes of the running-sum update
    ``p[j] += p[j - n]``.  Requires a nonnegative integer-valued weight.
    """
    if N > max_n:
        raise OracleInapplicableError(f"oracle limited to N <= {max_n}")
    if N < 0:
        raise DomainError("N must be nonnegative")
    values = f.exact_values(_sieve_for(N, sieve), N) if N >= 2 else [0] * (N + 1)
    return PartitionTable(N, colored_partition_counts(values), f.name, f.content_hash)


def colored_partition_counts(values) -> list[int]:
    """Counts for parts ``n`` available in ``values[n]`` colors (``values[0]`` ignored)."""
    N = len(values) - 1
    p = [1] + [0] * N
    for n in range(1, N + 1):
        k = values[n]
        if not isinstance(k, int) or k < 0:
            raise OracleInapplicableError(
                f"oracle needs nonnegative integer weights; f({n}) = {k}"
            )
        for _ in range(k):
            for j in range(n, N + 1):
                p[j] += p[j - n]
    return p


def recurrence_residuals(table: PartitionTable) -> list:
    """``n p[n] - sum_j a_j p[n-j]`` for ``n = 1..N``; all zero for a valid table."""
    if table.coefficients is None:
        raise PreconditionError("table carries no log-series coefficients")
    a, p = table.coefficients.a, table.p
    out = []
    for n in range(1, table.N + 1):
        acc = 0
        for j in range(1, n + 1):
            if a[j]:
                acc += a[j] * p[n - j]
        out.append(n * p[n] - acc)
    return out


def difference_table(table: PartitionTable) -> list:
    """``p[n+1] - p[n]`` for ``n = 0..N-1``."""
    if table.N < 1:
        raise DomainError("difference table needs N >= 1")
    p = table.p
    return [p[n + 1] - p[n] for n in range(table.N)]


def monotonicity_violations(table: PartitionTable, start: int = 6) -> list[int]:
    """Indices ``n >= start`` with ``p[n+1] < p[n]``; logged, never raised."""
    bad = [n for n in range(start, table.N) if table.p[n + 1] < table.p[n]]
    if bad:
        log.warning("p_f decreases at %d indices, first n=%d", len(bad), bad[0])
    return bad


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------


def _int_to_bytes(v: int) -> bytes:
    length = (v.bit_length() + 8) // 8
    return v.to_bytes(length, "little", signed=True)


def save_checkpoint(table: PartitionTable, path: str | Path) -> None:
    """Write the versioned binary table format.

    Layout: magic ``WPTB``, u16 version, u16 flags, 32-byte SHA-256 of the
    weight, u64 ``N``, then ``N+1`` entries each stored as a u32 byte length
    followed by a little-endian two's-complement integer.  Rational tables
    (flag bit 0) store numerator and denominator as two consecutive entries.
    """
    rational = not table.is_integral
    buf = io.BytesIO()
    buf.write(CHECKPOINT_MAGIC)
    buf.write(struct.pack("<HH", CHECKPOINT_VERSION, _FLAG_RATIONAL if rational else 0))
    buf.write(bytes.fromhex(table.weight_hash))
    buf.write(struct.pack("<Q", table.N))
    for v in table.p:
        parts = (v.numerator, v.denominator) if rational else (v,)
        for part in parts:
            raw = _int_to_bytes(int(part))
            buf.write(struct.pack("<I", len(raw)))
            buf.write(raw)
    Path(path).write_bytes(buf.getvalue())


def load_checkpoint(path: str | Path, weight_id: str = "") -> PartitionTable:
    data = Path(path).read_bytes()
    if data[:4] != CHECKPOINT_MAGIC:
        raise PreconditionError(f"{path}: not a partition table checkpoint")
    version, flags = struct.unpack_from("<HH", data, 4)
    if version != CHECKPOINT_VERSION:
        raise PreconditionError(f"{path}: unsupported checkpoint version {version}")
    weight_hash = data[8:40].hex()
    (N,) = struct.unpack_from("<Q", data, 40)
    pos = 48

    def read_int():
        nonlocal pos
        (length,) = struct.unpack_from("<I", data, pos)
        pos += 4
        v = int.from_bytes(data[pos : pos + length], "little", signed=True)
        pos += length
        return v

    p: list = []
    for _ in range(N + 1):
        if flags & _FLAG_RATIONAL:
            v = Fraction(read_int(), read_int())
            p.append(v.numerator if v.denominator == 1 else v)
        else:
            p.append(read_int())
    return PartitionTable(N, p, weight_id, weight_hash)


def table_digest(table: PartitionTable) -> str:
    h = hashlib.sha256()
    for v in table.p:
        h.update(str(v).encode())
        h.update(b",")
    return h.hexdigest()


def write_table_csv(table: PartitionTable, header: str | None = None) -> str:
    out = io.StringIO()
    if header:
        out.write(f"# {header}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "p"])
    for n, v in enumerate(table.p):
        w.writerow([n, str(v)])
    return out.getvalue()


def write_table_json(table: PartitionTable, header: str | None = None) -> str:
    payload = {
        "manifest": header,
        "weight_id": table.weight_id,
        "weight_hash": table.weight_hash,
        "N": table.N,
        "p": [v if isinstance(v, int) else str(v) for v in table.p],
    }
    return json.dumps(payload)
