"""Exception types shared across the package."""


class SplittingError(Exception):
    """Base class for all package errors."""


class UsageError(SplittingError, ValueError):
    """Raised on malformed arguments (dimension mismatch, bad parameters)."""


class DomainError(SplittingError, ValueError):
    """Raised when a point lies outside the domain of a set-valued operator."""


class UnsupportedError(SplittingError, NotImplementedError):
    """Raised when a closed form is not available for an operator kind."""


class ContractViolation(SplittingError, RuntimeError):
    """Raised when a user-supplied callback breaks its contract."""


class ProblemError(SplittingError, ValueError):
    """Raised when a benchmark problem cannot be constructed."""


class HypothesisRejected(SplittingError):
    """Raised when a schedule fails the convergence hypotheses of a solver."""

    def __init__(self, reasons):
        self.reasons = list(reasons)
        super().__init__("; ".join(self.reasons))


class NumericalAbort(SplittingError, ArithmeticError):
    """Raised when an iterate becomes non-finite.

    Carries the last state whose iterate was finite and the records gathered
    up to that point, so callers can persist a partial trace.
    """

    def __init__(self, message, state=None, records=None):
        super().__init__(message)
        self.state = state
        self.records = list(records or [])


class ConfigError(SplittingError, ValueError):
    """Raised when a run configuration cannot be parsed or validated."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = ""
        if key is not None:
            where = f" (key {key!r}"
            where += f", line {line})" if line is not None else ")"
        super().__init__(message + where)
