"""Command-line entry point: ``wpart <subcommand> [options]``.

Every run builds a :class:`RunManifest`; its hash is written as the first
``# manifest: <hash>`` line of CSV output and as the ``manifest`` key of JSON
output.  Exit codes: 0 success, 1 failed check, 2 precondition error,
3 budget exceeded, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath

from . import __version__
from .constants import DEFAULT_DPS, build_constants
from .errors import BudgetError, WeightedPartitionError, WeightMismatchError
from .exact import (
    brute_force_oracle,
    load_checkpoint,
    partition_table,
    save_checkpoint,
    write_table_csv,
    write_table_json,
)
from .expsum import NAMED_THETAS, classify_arc, dirichlet_approx, minor_arc_bound_scan, trend_slope
from .numtheory import build_sieve, resolve_weight
from .saddle import compare_with_table, predict_difference, predict_saddle, solve_many

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_PRECONDITION, EXIT_BUDGET, EXIT_USAGE = 0, 1, 2, 3, 64
AUTO_CHECKPOINT_N = 10_000
# parameters that name files rather than change results
_PATH_PARAMS = {"out", "checkpoint", "table", "config"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunManifest:
    subcommand: str
    weight_id: str
    weight_hash: str
    parameters: dict
    tool_version: str = __version__
    wall_time: float = 0.0
    output_paths: list = field(default_factory=list)

    @property
    def hash(self) -> str:
        """Hash over everything that determines the results (not timing or paths)."""
        key = {
            "subcommand": self.subcommand,
            "weight_id": self.weight_id,
            "weight_hash": self.weight_hash,
            "parameters": self.parameters,
            "tool_version": self.tool_version,
        }
        blob = json.dumps(key, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def to_json(self) -> str:
        return json.dumps({**asdict(self), "hash": self.hash}, indent=2, default=str)


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------


def parse_n_list(text: str) -> list[int]:
    """``"100,200"``, ``"500:10001:500"`` (stop exclusive) or a mix of both."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = [int(float(b)) for b in part.split(":")]
            if len(bits) == 2:
                bits.append(1)
            start, stop, step = bits
            if step <= 0:
                raise argparse.ArgumentTypeError("range step must be positive")
            out.extend(range(start, stop, step))
        else:
            out.append(int(float(part)))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def parse_theta(text: str):
    """Named preset, exact fraction ``a/q`` or a float."""
    text = text.strip()
    if text in NAMED_THETAS:
        return NAMED_THETAS[text]
    if "/" in text:
        return Fraction(text)
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad theta {text!r}") from None


def parse_theta_list(text: str) -> list:
    return [parse_theta(t) for t in text.split(",") if t.strip()]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, str)):
        return str(x)
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 17)
    return "%.17g" % x


def _common(p: argparse.ArgumentParser, weight: bool = True) -> None:
    if weight:
        p.add_argument("--weight", default="omega",
                       help="omega, prime-indicator, const:C, indicator:P1,P2,... or file:PATH")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--report", choices=("csv", "json"), default="csv", help="output format")
    p.add_argument("--tol", type=float, default=None, help="numerical tolerance")
    p.add_argument("--sieve-limit", type=int, default=None, help="sieve size override")
    p.add_argument("--seed", type=int, default=0, help="recorded in the manifest; unused")
    p.add_argument("--config", help="JSON file of option defaults")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser(defaults: dict | None = None) -> _Parser:
    defaults = defaults or {}

    def req(dest):
        # a value from the config file satisfies a required option
        return dest not in defaults

    parser = _Parser(prog="wpart", description="Weighted partition toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    p = sub.add_parser("exact", help="exact table p_f(0..N)")
    _common(p)
    p.add_argument("--n-max", type=int, required=req("n_max"), help="largest n")
    p.add_argument("--checkpoint", help=f"binary table path (default <out>.wptb when N > {AUTO_CHECKPOINT_N})")
    p.add_argument("--max-n", type=int, default=200_000, help="table size budget")

    p = sub.add_parser("oracle", help="check the recurrence against brute force")
    _common(p)
    p.add_argument("--n-max", type=int, required=req("n_max"), help="largest n (at most 200)")

    p = sub.add_parser("saddle", help="saddle points and saddle predictions")
    _common(p)
    p.add_argument("--n", type=parse_n_list, required=req("n"), help="targets, e.g. 100,1000 or 500:5001:500")

    p = sub.add_parser("compare", help="join a checkpoint table with predictions")
    _common(p)
    p.add_argument("--table", required=req("table"), help="checkpoint written by 'exact'")
    p.add_argument("--n", type=parse_n_list, required=req("n"), help="rows to compare")
    p.add_argument("--leading", choices=("general", "omega"), default="general",
                   help="constants used by the leading-order formula")

    p = sub.add_parser("constants", help="constants bundle as JSON")
    _common(p)
    p.add_argument("--dps", type=int, default=DEFAULT_DPS, help="working decimal digits")
    p.add_argument("--direct-check", action="store_true",
                   help="also evaluate the Meissel-Mertens constant by a direct prime sum")

    p = sub.add_parser("expsum", help="Weyl sums against the minor-arc bound")
    _common(p)
    p.add_argument("--n-grid", type=parse_n_list, required=req("n_grid"), help="sum lengths N")
    p.add_argument("--theta-grid", type=parse_theta_list, default=[NAMED_THETAS["golden"]],
                   help="comma list of golden, sqrt2, pi, a/q or floats")
    p.add_argument("--A", type=float, default=2.0, help="major-arc exponent")

    p = sub.add_parser("arcs", help="major/minor classification of theta")
    _common(p, weight=False)
    p.add_argument("--theta", type=parse_theta, required=req("theta"), help="golden, sqrt2, pi, a/q or a float")
    p.add_argument("--x", type=float, required=req("x"), help="scale X (>= 16)")
    p.add_argument("--A", type=float, default=2.0, help="major-arc exponent")
    p.add_argument("--q-cap", type=int, default=None, help="denominator cap for the convergent")

    if defaults:
        for action in sub.choices.values():
            known = {a.dest for a in action._actions}
            action.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    return parser


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _csv_text(manifest: RunManifest, header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# manifest: {manifest.hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_text(manifest: RunManifest, header, rows) -> str:
    records = [dict(zip(header, (v if isinstance(v, (int, str)) or v is None else float(v) for v in r)))
               for r in rows]
    return json.dumps({"manifest": manifest.hash, "rows": records}, indent=2, default=str)


def _emit(args, manifest: RunManifest, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
        manifest.output_paths.append(args.out)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_rows(args, manifest, header, rows) -> None:
    text = _json_text(manifest, header, rows) if args.report == "json" else _csv_text(manifest, header, rows)
    _emit(args, manifest, text)


def _write_manifest(args, manifest: RunManifest) -> None:
    if args.out:
        path = f"{args.out}.manifest.json"
        manifest.output_paths.append(path)
        Path(path).write_text(manifest.to_json())


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _sieve(args, need: int):
    return build_sieve(max(args.sieve_limit or 0, need, 2))


def cmd_exact(args, f, manifest) -> int:
    N = args.n_max
    table = partition_table(f, N, _sieve(args, N), max_n=args.max_n)
    ckpt = args.checkpoint
    if ckpt is None and N > AUTO_CHECKPOINT_N and args.out:
        ckpt = f"{args.out}.wptb"
    if ckpt:
        save_checkpoint(table, ckpt)
        manifest.output_paths.append(ckpt)
    header = f"manifest: {manifest.hash}"
    text = write_table_json(table, manifest.hash) if args.report == "json" else write_table_csv(table, header)
    _emit(args, manifest, text)
    return EXIT_OK


def cmd_oracle(args, f, manifest) -> int:
    N = args.n_max
    sieve = _sieve(args, N)
    fast = partition_table(f, N, sieve)
    slow = brute_force_oracle(f, N, sieve)
    rows = [(n, a, b, int(a == b)) for n, (a, b) in enumerate(zip(fast.p, slow.p))]
    _emit_rows(args, manifest, ["n", "p_recurrence", "p_oracle", "equal"], rows)
    return EXIT_OK if fast.p == slow.p else EXIT_CHECK_FAILED


def cmd_saddle(args, f, manifest) -> int:
    tol = args.tol or 1e-9
    rows = []
    for sol in solve_many(f, args.n, tol):
        pred, diff = predict_saddle(sol), predict_difference(sol)
        rows.append((sol.n_target, sol.X, sol.rho, sol.phi0.value, sol.phi1.value, sol.phi2.value,
                     sol.residual, pred.log_p_predicted, diff.log_p_predicted))
    header = ["n", "X", "rho", "phi0", "phi1", "phi2", "residual", "log_p_saddle", "log_dp_saddle"]
    _emit_rows(args, manifest, header, rows)
    return EXIT_OK


def cmd_compare(args, f, manifest) -> int:
    path = Path(args.table)
    if not path.exists():
        raise WeightMismatchError(f"checkpoint {path} does not exist")
    table = load_checkpoint(path, f.name)
    if table.weight_hash != f.content_hash:
        raise WeightMismatchError(
            f"checkpoint weight hash {table.weight_hash[:12]} does not match {f.name!r} ({f.content_hash[:12]})"
        )
    manifest.parameters["table_hash"] = table.weight_hash
    bundle = build_constants(f, sieve=_sieve(args, 10**6) if callable(f.default) else None)
    rows = compare_with_table(table, f, args.n, bundle, args.tol or 1e-9, args.leading)
    header = ["n", "p_exact", "p_saddle", "ratio_saddle", "p_leading", "log_ratio_leading"]
    _emit_rows(args, manifest, header, [tuple(asdict(r).values()) for r in rows])
    return EXIT_OK


def cmd_constants(args, f, manifest) -> int:
    need = 10**6 if args.direct_check or callable(f.default) else 0
    sieve = _sieve(args, need) if need else None
    bundle = build_constants(f, tol=args.tol or 1e-30, dps=args.dps, sieve=sieve,
                             direct_check=args.direct_check)
    _emit(args, manifest, bundle.to_json(manifest=manifest.hash))
    return EXIT_OK


def cmd_expsum(args, f, manifest) -> int:
    reports = minor_arc_bound_scan(f, args.n_grid, args.theta_grid, _sieve(args, max(args.n_grid)), args.A)
    rows = [
        (r.theta, r.N, r.value.real, r.value.imag, abs(r.value), r.approx.a, r.approx.q,
         r.params["R"], r.normalized_ratio, r.bound_ratio, r.arc_class, r.note)
        for r in reports
    ]
    header = ["theta", "N", "re", "im", "abs", "a", "q", "R", "normalized_ratio", "bound_ratio",
              "arc", "note"]
    _emit_rows(args, manifest, header, rows)
    for theta in args.theta_grid:
        sel = [r for r in reports if r.theta == float(Fraction(theta) % 1)]
        if len(sel) >= 2:
            slope = trend_slope([r.N for r in sel], [r.normalized_ratio for r in sel])
            log.info("theta=%.17g sup ratio %.3g slope %.3g", sel[0].theta,
                     max(r.normalized_ratio for r in sel), slope)
    return EXIT_OK


def cmd_arcs(args, f, manifest) -> int:
    arc = classify_arc(args.theta, args.x, args.A)
    q_cap = args.q_cap or max(1, int(arc.Q))
    approx = dirichlet_approx(args.theta, q_cap)
    a, q = arc.witness if arc.witness else ("", "")
    rows = [(approx.theta, args.x, args.A, arc.Q, arc.P, arc.arc_class, a, q,
             approx.a, approx.q, approx.beta)]
    header = ["theta", "X", "A", "Q", "max_q", "arc", "witness_a", "witness_q",
              "approx_a", "approx_q", "beta"]
    _emit_rows(args, manifest, header, rows)
    return EXIT_OK


COMMANDS = {
    "exact": cmd_exact,
    "oracle": cmd_oracle,
    "saddle": cmd_saddle,
    "compare": cmd_compare,
    "constants": cmd_constants,
    "expsum": cmd_expsum,
    "arcs": cmd_arcs,
}


def _load_config(argv) -> dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    try:
        data = json.loads(Path(known.config).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from None
    return {k.replace("-", "_"): v for k, v in data.items()}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser(_load_config(argv))
        if not argv:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                         format="%(levelname)s %(name)s: %(message)s")

    params = {k: v for k, v in sorted(vars(args).items())
              if k not in _PATH_PARAMS | {"subcommand", "weight", "verbose", "report"}}
    params = json.loads(json.dumps(params, default=str))
    start = time.perf_counter()
    try:
        f = resolve_weight(args.weight) if getattr(args, "weight", None) else None
        manifest = RunManifest(args.subcommand, f.name if f else "", f.content_hash if f else "", params)
        code = COMMANDS[args.subcommand](args, f, manifest)
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (WeightedPartitionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    manifest.wall_time = time.perf_counter() - start
    _write_manifest(args, manifest)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
