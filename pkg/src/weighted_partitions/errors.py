"""Exception hierarchy shared by all modules.

The CLI maps ``BudgetError`` to exit code 3 and every other
``WeightedPartitionError`` to exit code 2.
"""


class WeightedPartitionError(Exception):
    """Base class for errors raised by this package."""


class DomainError(WeightedPartitionError, ValueError):
    """An argument lies outside the domain of the operation."""


class SieveSizeError(DomainError):
    """Requested sieve limit is below 2 or above the memory budget."""


class UndefinedWeightError(WeightedPartitionError, KeyError):
    """A weight value is needed at a prime where none is defined."""

    def __str__(self):  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class ConditionViolationError(WeightedPartitionError, ValueError):
    """The weight violates a growth or positivity condition required here."""


class OracleInapplicableError(WeightedPartitionError, ValueError):
    """The brute-force oracle cannot handle this weight or size."""


class PreconditionError(WeightedPartitionError, ValueError):
    """A documented precondition (coprimality, ranges, ...) does not hold."""


class WeightMismatchError(PreconditionError):
    """Two artifacts refer to different weight functions."""


class SaddleError(WeightedPartitionError, RuntimeError):
    """The saddle-point solver could not certify a solution."""


class BudgetError(WeightedPartitionError, RuntimeError):
    """A computation would exceed its term or memory budget.

    ``partial`` carries whatever value was available when the budget ran out.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
