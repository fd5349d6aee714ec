"""Partitions weighted by strongly additive functions.

Exact coefficient tables, saddle-point asymptotics, the constants they need
and the exponential-sum checks behind the circle method.
"""

__version__ = "0.1.0"

from .constants import ConstantsBundle, build_constants, meissel_mertens, prime_zeta
from .exact import PartitionTable, brute_force_oracle, partition_table
from .expsum import classify_arc, dirichlet_approx, ramanujan_constant_check, weyl_sum
from .numtheory import WeightFunction, build_sieve, omega_weight, resolve_weight
from .saddle import predict_difference, predict_saddle, solve_saddle

__all__ = [
    "ConstantsBundle",
    "PartitionTable",
    "WeightFunction",
    "brute_force_oracle",
    "build_constants",
    "build_sieve",
    "classify_arc",
    "dirichlet_approx",
    "meissel_mertens",
    "omega_weight",
    "partition_table",
    "predict_difference",
    "predict_saddle",
    "prime_zeta",
    "ramanujan_constant_check",
    "resolve_weight",
    "solve_saddle",
    "weyl_sum",
]
