"""Penalty-type forward-backward and forward-backward-forward kernels and the run loop.

Every kernel is a pure function of its inputs. The run loop owns the only
mutable state: the current iterate, the compensated ergodic accumulators and
the diagnostic trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, HypothesisRejected, NumericalAbort, UsageError
from .hilbert import LinearMap, as_vector
from .operators import (
    CouplingOperator,
    PenaltyLift,
    ProductOperator,
    Zero,
    inverse_resolvent,
)
from .problems import ProblemInstance, StoppingPolicy, penalty_certification
from .schedules import SOLVER_KINDS, Admissibility, PolynomialSchedule, admissible_for

__all__ = [
    "SolverState",
    "IterationRecord",
    "RunResult",
    "ergodic_update",
    "fb_setvalued_step",
    "fb_step",
    "fbf_step",
    "fbf_composite_step",
    "product_space_operators",
    "run",
    "WARN_L2_GROWTH",
    "CONSECUTIVE_QUIET",
]

WARN_L2_GROWTH = "hypothesis unverified: Σ(λ_nβ_n‖w_n‖)² grows superlinearly in log n"
# recorded steps in a row that must satisfy the tolerance before stopping early
CONSECUTIVE_QUIET = 100


@dataclass(frozen=True, eq=False)
class SolverState:
    """Iterate ``x_n`` together with the compensated sums behind ``z_n``.

    ``z_acc``/``tau`` carry ``sum lambda_k x_k`` and ``sum lambda_k``; the
    ``*_comp`` fields hold the Kahan compensation terms.
    """

    n: int
    x: np.ndarray
    z_acc: np.ndarray
    tau: float
    z_comp: np.ndarray
    tau_comp: float = 0.0
    v: np.ndarray | None = None
    last_p: np.ndarray | None = None
    last_w: np.ndarray | None = None

    @classmethod
    def initial(cls, x1, v1=None) -> "SolverState":
        x1 = np.asarray(x1, dtype=float).copy()
        return cls(0, x1, np.zeros_like(x1), 0.0, np.zeros_like(x1), 0.0,
                   None if v1 is None else np.asarray(v1, dtype=float).copy())

    @property
    def z(self) -> np.ndarray | None:
        """Ergodic iterate ``z_n``; ``None`` before the first step."""
        if self.tau == 0.0:
            return None
        return self.z_acc / self.tau


@dataclass(frozen=True)
class IterationRecord:
    n: int
    lam: float
    beta: float
    step_displacement: float
    penalty_residual: float
    fbf_gap: float | None = None
    oracle_error_x: float | None = None
    oracle_error_z: float | None = None


@dataclass(eq=False)
class RunResult:
    state: SolverState
    records: list[IterationRecord]
    admissibility: Admissibility
    warnings: list[str] = field(default_factory=list)
    stopped_early: bool = False


def _kahan(total, comp, term):
    y = term - comp
    t = total + y
    return t, (t - total) - y


def ergodic_update(state: SolverState, lam: float, x) -> SolverState:
    """Fold ``lam * x`` into the ergodic sums and make ``x`` the current iterate."""
    lam = float(lam)
    if not lam > 0:
        raise UsageError("λ_n must be positive")
    x = np.asarray(x, dtype=float)
    z_acc, z_comp = _kahan(state.z_acc, state.z_comp, lam * x)
    tau, tau_comp = _kahan(state.tau, state.tau_comp, lam)
    return replace(state, n=state.n + 1, x=x, z_acc=z_acc, z_comp=z_comp, tau=tau, tau_comp=tau_comp)


def fb_setvalued_step(A, D, B, lam, beta, x):
    """``w = sel(B, x)``, ``x+ = J_{lam A}(x - lam Dx - lam beta w)``; returns ``(x+, w)``."""
    if not B.in_domain(x):
        raise DomainError("iterate left dom B")
    w = B.selection(x)
    return A.resolvent(lam, x - lam * D.eval(x) - lam * beta * w), w


def fb_step(A, D, B, lam, beta, x):
    return A.resolvent(lam, x - lam * D.eval(x) - lam * beta * B.eval(x))


def fbf_step(A, D, B, lam, beta, x):
    """Tseng-type step with penalty; returns ``(p, x+)``.

    ``B`` and ``D`` are each evaluated twice, at ``x`` and at ``p``.
    """
    bx = B.eval(x)
    dx = D.eval(x)
    p = A.resolvent(lam, x - lam * dx - lam * beta * bx)
    return p, lam * beta * (bx - B.eval(p)) + lam * (dx - D.eval(p)) + p


def fbf_composite_step(A1, A2, K: LinearMap, D, B, lam, beta, x, v):
    """Primal-dual step for ``A1 + K* A2 K + D + N_C``; returns ``(p, q, x+, v+)``.

    The dual resolvent ``J_{lam A2^{-1}}`` is always taken through the Moreau
    identity, so ``A2`` only needs a resolvent.
    """
    if isinstance(A2, Zero):
        raise UsageError("A₂ = Zero is not supported: its inverse is not a catalog operator")
    if x.shape != (K.dim_in,) or v.shape != (K.dim_out,):
        raise UsageError(
            f"iterate shapes {x.shape}, {v.shape} do not conform with K of shape {K.shape}"
        )
    kx = K.matrix @ x
    ktv = K.adjoint_matrix @ v
    bx = B.eval(x)
    dx = D.eval(x)
    p = A1.resolvent(lam, x - lam * (dx + ktv) - lam * beta * bx)
    q = inverse_resolvent(A2, lam, v + lam * kx)
    x_next = lam * beta * (bx - B.eval(p)) + lam * (dx - D.eval(p)) + lam * (ktv - K.adjoint_matrix @ q) + p
    v_next = lam * (K.matrix @ (p - x)) + q
    return p, q, x_next, v_next


def product_space_operators(A1, A2, K: LinearMap, D, B):
    """``(A1 x A2^{-1}, (x, v) -> (Dx + K*v, -Kx), (x, v) -> (Bx, 0))`` on ``H x G``.

    Running ``fbf_step`` on these reproduces ``fbf_composite_step``.
    """
    return ProductOperator(A1, A2), CouplingOperator(D, K), PenaltyLift(B, K.dim_out)


def _check_problem(problem: ProblemInstance, solver: str):
    if solver not in SOLVER_KINDS:
        raise UsageError(f"unknown solver {solver!r}; expected one of {', '.join(SOLVER_KINDS)}")
    if solver == "fbf_composite":
        if problem.K is None or problem.A2 is None:
            raise UsageError("fbf_composite needs a problem with K and A₂")
        if isinstance(problem.A2, Zero):
            raise UsageError("A₂ = Zero is not supported: its inverse is not a catalog operator")
    elif problem.K is not None:
        raise UsageError(f"{solver} cannot solve a composite problem; use fbf_composite")
    if not problem.D.single_valued:
        raise UsageError("D must be single-valued")
    if solver != "fb_setvalued" and not problem.B.single_valued:
        raise UsageError(f"{solver} needs single-valued B; use fb_setvalued")


def _superlinear(decade_sums):
    """Whether per-decade increments of a running sum are still growing."""
    if len(decade_sums) < 3:
        return False
    inc = np.diff(decade_sums)
    return bool(inc[-1] > inc[-2] * (1.0 + 1e-9) and inc[-1] > 1e-12 * max(1.0, decade_sums[-1]))


def run(
    problem: ProblemInstance,
    schedule: PolynomialSchedule,
    solver: str,
    stop: StoppingPolicy | None = None,
    x0=None,
    v0=None,
    override: bool = False,
) -> RunResult:
    """Iterate ``solver`` on ``problem`` and collect a diagnostic trace.

    The hypotheses of the convergence theory are checked first; a failed
    check raises :class:`HypothesisRejected` unless ``override`` is set, in
    which case the reasons are kept as warnings. A non-finite iterate raises
    :class:`NumericalAbort` carrying the last good state and the trace so far.
    """
    stop = StoppingPolicy() if stop is None else stop
    _check_problem(problem, solver)
    adm = admissible_for(schedule, solver, penalty=penalty_certification(problem.B, problem.C),
                         **problem.moduli(solver))
    warnings = list(adm.warnings)
    if not adm.ok:
        if not override:
            raise HypothesisRejected(adm.reasons)
        warnings.extend(f"overridden: {r}" for r in adm.reasons)

    A, D, B = problem.A, problem.D, problem.B
    dim = problem.dim
    x = np.zeros(dim) if x0 is None else as_vector(x0, dim, "x0")
    v = None
    if solver == "fbf_composite":
        v = np.zeros(problem.K.dim_out) if v0 is None else as_vector(v0, problem.K.dim_out, "v0")
    oracle = problem.oracle
    # ergodic sums are kept in locals here; SolverState is built on exit
    n, z_acc, z_comp, tau, tau_comp = 0, np.zeros(dim), np.zeros(dim), 0.0, 0.0
    p = w = None

    def snapshot():
        return SolverState(n, x, z_acc, tau, z_comp, tau_comp, v, p, w)

    records: list[IterationRecord] = []
    quiet = 0
    stopped = False
    l2_sum = 0.0
    decade_sums: list[float] = []
    next_decade = 1
    is_multi = solver == "fb_setvalued"

    with np.errstate(all="ignore"):
        for k in range(1, stop.max_iter + 1):
            lam, beta = schedule(k)
            n = k
            z_acc, z_comp = _kahan(z_acc, z_comp, lam * x)
            tau, tau_comp = _kahan(tau, tau_comp, lam)
            v_next = None
            if is_multi:
                x_next, w = fb_setvalued_step(A, D, B, lam, beta, x)
                l2_sum += (lam * beta * float(np.linalg.norm(w))) ** 2
                if k == next_decade:
                    decade_sums.append(l2_sum)
                    next_decade *= 10
            elif solver == "fb":
                x_next = fb_step(A, D, B, lam, beta, x)
            elif solver == "fbf":
                p, x_next = fbf_step(A, D, B, lam, beta, x)
            else:
                p, _, x_next, v_next = fbf_composite_step(
                    A, problem.A2, problem.K, D, B, lam, beta, x, v)

            if not (np.isfinite(x_next).all() and (v_next is None or np.isfinite(v_next).all())):
                raise NumericalAbort(f"non-finite iterate at n = {k + 1}", state=snapshot(), records=records)

            if k % stop.record_every == 0:
                step = float(np.linalg.norm(x_next - x))
                resid = float(np.linalg.norm(w if w is not None else B.eval(x)))
                if not (math.isfinite(step) and math.isfinite(resid)):
                    raise NumericalAbort(f"non-finite diagnostic at n = {k}", state=snapshot(), records=records)
                records.append(IterationRecord(
                    n=k, lam=lam, beta=beta, step_displacement=step, penalty_residual=resid,
                    fbf_gap=None if p is None else float(np.linalg.norm(x - p)),
                    oracle_error_x=None if oracle is None else float(np.linalg.norm(x - oracle)),
                    oracle_error_z=None if oracle is None else float(np.linalg.norm(z_acc / tau - oracle)),
                ))
                quiet = quiet + 1 if step / lam < stop.tol and resid < stop.tol else 0
                if quiet >= CONSECUTIVE_QUIET:
                    stopped = True
                    break

            if k < stop.max_iter:
                x, v = x_next, v_next

    state = snapshot()
    if solver == "fb_setvalued" and _superlinear(decade_sums):
        warnings.append(WARN_L2_GROWTH)
    return RunResult(state, records, adm, warnings, stopped)
