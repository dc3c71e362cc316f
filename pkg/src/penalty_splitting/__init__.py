"""Penalty-type splitting algorithms for monotone inclusions over the zeros of a monotone operator.

Solves ``0 in Ax + Dx + N_C(x)`` with ``C = zer B`` (and the composite
variant ``0 in A1 x + K* A2 K x + Dx + N_C(x)``) by forward-backward and
forward-backward-forward iterations that penalize ``B`` with a growing
parameter ``beta_n`` instead of projecting onto ``C``.
"""

from . import hilbert, operators, problems, schedules, solvers
from .errors import (
    ConfigError,
    ContractViolation,
    DomainError,
    HypothesisRejected,
    NumericalAbort,
    ProblemError,
    SplittingError,
    UnsupportedError,
    UsageError,
)
from .problems import (
    ProblemInstance,
    StoppingPolicy,
    make_quadratic_over_nullspace,
    make_saddle_composite,
    make_strongly_monotone,
    verify_oracle,
)
from .schedules import PolynomialSchedule, admissible_for, classify, make_schedule
from .solvers import (
    IterationRecord,
    SolverState,
    ergodic_update,
    fb_setvalued_step,
    fb_step,
    fbf_composite_step,
    fbf_step,
    run,
)

__version__ = "0.1.0"
