"""Benchmark monotone inclusions ``0 in Ax + Dx + N_C(x)`` with oracle solutions.

Oracles are computed by machinery unrelated to the splitting kernels (closed
form projections, Dykstra projections, projected fixed-point iterations,
dense KKT solves), so that solver runs can be checked against them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ProblemError, UsageError
from .hilbert import LinearMap, as_matrix, as_vector, operator_norm
from .operators import (
    AffineMonotone,
    Box,
    ConvexSet,
    DistanceGradient,
    MonotoneOperator,
    NormalCone,
    Quadratic,
    ScaledIdentity,
    SkewLinear,
    SquaredNormComposite,
    Subspace,
    UserResolvent,
    WholeSpace,
    Zero,
    project_intersection,
)
from .operators.linalg import row_space

__all__ = [
    "ProblemInstance",
    "StoppingPolicy",
    "make_quadratic_over_nullspace",
    "make_strongly_monotone",
    "make_saddle_composite",
    "verify_oracle",
    "penalty_certification",
    "PROBLEMS",
    "build_problem",
]

MAX_DIM = 64


@dataclass(frozen=True)
class StoppingPolicy:
    max_iter: int = 100_000
    tol: float = 1e-8
    record_every: int = 100

    def __post_init__(self):
        if not isinstance(self.max_iter, (int, np.integer)) or self.max_iter < 0:
            raise UsageError("max_iter must be a nonnegative integer")
        if not (self.tol > 0):
            raise UsageError("tol must be positive")
        if not isinstance(self.record_every, (int, np.integer)) or self.record_every < 1:
            raise UsageError("record_every must be a positive integer")


@dataclass(eq=False)
class ProblemInstance:
    """Operator data of one inclusion problem plus an optional oracle solution.

    For composite problems ``A`` plays the role of ``A1`` and the inclusion is
    ``0 in A1 x + K* A2 K x + Dx + N_C(x)``.
    """

    name: str
    A: MonotoneOperator
    D: MonotoneOperator
    B: MonotoneOperator
    C: ConvexSet
    K: LinearMap | None = None
    A2: MonotoneOperator | None = None
    oracle: np.ndarray | None = None
    certificate: str = ""
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.A.dim

    @property
    def is_composite(self) -> bool:
        return self.K is not None

    def knorm(self) -> float:
        return operator_norm(self.K) if self.K is not None else 0.0

    def moduli(self, solver: str) -> dict:
        """Moduli ``mu``, ``eta`` (and ``knorm``) as required by ``solver``'s hypotheses."""
        out = {}
        if solver in ("fb", "fb_setvalued"):
            out["mu"] = self.B.cocoercivity
            out["eta"] = self.D.cocoercivity
        else:
            out["mu"] = _inverse(self.B.lipschitz)
            out["eta"] = _inverse(self.D.lipschitz)
        if solver == "fbf_composite":
            out["knorm"] = self.knorm()
        return out


def _inverse(lip):
    if lip is None:
        return None
    return math.inf if lip == 0 else 1.0 / lip


def penalty_certification(B: MonotoneOperator, C: ConvexSet) -> str:
    """How the penalty-gap hypothesis can be certified for ``(B, C)``.

    Affine gradients and distance gradients have penalty gaps of order
    ``1/beta_n^2``, so summability of ``lambda_n/beta_n`` suffices.
    """
    if isinstance(C, WholeSpace) or isinstance(B, (Zero, NormalCone)):
        return "trivial"
    if isinstance(B, AffineMonotone) and not np.any(B.matrix) and not np.any(B.offset):
        return "trivial"
    if isinstance(B, AffineMonotone) and B.symmetric:
        return "quadratic"
    if isinstance(B, DistanceGradient):
        return "quadratic"
    return "unverified"


def _box(box, dim) -> Box | None:
    if box is None:
        return None
    if isinstance(box, Box):
        return box
    lo, hi = box
    return Box(lo, hi, dim)


def _check_dim(dim):
    if dim > MAX_DIM:
        raise ProblemError(f"dimension {dim} exceeds the supported maximum of {MAX_DIM}")


def make_quadratic_over_nullspace(d, L, box=None) -> ProblemInstance:
    """Minimize ``||x - d||^2`` over ``{Lx = 0}`` (optionally intersected with a box).

    The penalty is ``Psi(x) = ||Lx||^2`` so ``B = 2 L^T L`` with modulus
    ``1 / (2 ||L||^2)``; ``D = 2 (x - d)`` is 1/2-cocoercive. The oracle is the
    projection of ``d`` onto ``C`` (or onto ``C`` intersected with the box).
    """
    d = as_vector(d, name="d")
    Lm = L.matrix if isinstance(L, LinearMap) else as_matrix(L, "L")
    if Lm.shape[1] != d.size:
        raise ProblemError(f"L has {Lm.shape[1]} columns but d has dimension {d.size}")
    _check_dim(d.size)
    psi = SquaredNormComposite(Lm)
    B = psi.subdifferential()
    C = Subspace(Lm)
    D = AffineMonotone(2.0 * np.eye(d.size), -2.0 * d)
    bx = _box(box, d.size)
    if bx is None:
        A = Zero(d.size)
        oracle = C.project(d)
        cert = "orthogonal projection onto null(L)"
    else:
        A = NormalCone(bx)
        oracle = project_intersection([C, bx], d)
        if not (C.contains(oracle, 1e-9) and bx.contains(oracle, 1e-9)):
            raise ProblemError("null(L) does not meet the box")
        cert = "Dykstra projection onto null(L) ∩ box"
    return ProblemInstance(
        "quadratic_over_nullspace", A, D, B, C, oracle=oracle, certificate=cert,
        params={"d": d, "L": Lm, "box": bx},
    )


def make_strongly_monotone(gamma, target, C, B=None, D=None) -> ProblemInstance:
    """``A x = gamma (x - target)`` with penalty ``B = Id - P_C`` unless given.

    The oracle is the unique zero of ``A + D + N_C``, found by the projected
    fixed-point map ``x -> P_C(x - s (Ax + Dx))``, a contraction for
    ``s = gamma / Lip^2``.
    """
    gamma = float(gamma)
    if not gamma > 0:
        raise ProblemError("gamma must be positive")
    target = as_vector(target, name="target")
    _check_dim(target.size)
    if not isinstance(C, ConvexSet):
        C = Box(C[0], C[1], target.size)
    if C.dim != target.size:
        raise ProblemError("C and target have different dimensions")
    A = ScaledIdentity(gamma, center=target)
    B = DistanceGradient(C) if B is None else B
    D = Zero(target.size) if D is None else D
    lip_d = D.lipschitz if D.lipschitz is not None else 0.0
    s = gamma / (gamma + lip_d) ** 2
    x = C.project(target)
    for _ in range(10_000_000):
        nxt = C.project(x - s * (A.eval(x) + D.eval(x)))
        if np.linalg.norm(nxt - x) <= 1e-15 * max(1.0, float(np.linalg.norm(x))):
            x = nxt
            break
        x = nxt
    return ProblemInstance(
        "strongly_monotone", A, D, B, C, oracle=x,
        certificate="projected fixed-point iteration",
        params={"gamma": gamma, "target": target},
    )


def make_saddle_composite(Q1, d1, Q2, K, L, D=None) -> ProblemInstance:
    """``0 in A1 x + K* A2 K x + Dx + N_C(x)`` with quadratic ``A1``, ``A2`` and ``C = null(L)``.

    ``A1 = Q1 (x - d1)``, ``A2 = Q2``. The oracle solves the KKT system
    ``[H, R^T; R, 0] [x; nu] = [Q1 d1 - b; 0]`` where ``H = Q1 + K^T Q2 K`` (+ the
    linear part of ``D``), ``b`` is the offset of ``D`` and ``R`` spans the row
    space of ``L``.
    """
    Q1 = as_matrix(Q1, "Q1")
    Q2 = as_matrix(Q2, "Q2")
    d1 = as_vector(d1, Q1.shape[0], "d1")
    Km = K if isinstance(K, LinearMap) else LinearMap(as_matrix(K, "K"))
    Lm = L.matrix if isinstance(L, LinearMap) else as_matrix(L, "L")
    n = d1.size
    _check_dim(n)
    if Km.dim_in != n or Km.dim_out != Q2.shape[0] or Lm.shape[1] != n:
        raise ProblemError("dimensions of Q1, Q2, K and L do not conform")
    A1 = Quadratic(Q1, -(Q1 @ d1))
    A2 = Quadratic(Q2)
    D = Zero(n) if D is None else D
    if not isinstance(D, AffineMonotone):
        raise ProblemError("D must be affine for the KKT oracle")
    psi = SquaredNormComposite(Lm)
    B = psi.subdifferential()
    C = Subspace(Lm)

    H = Q1 + Km.adjoint_matrix @ Q2 @ Km.matrix + D.matrix
    R = row_space(Lm).T
    r = R.shape[0]
    kkt = np.block([[H, R.T], [R, np.zeros((r, r))]])
    rank = np.linalg.matrix_rank(kkt, tol=1e-10 * max(1.0, np.abs(kkt).max()))
    if rank < n + r:
        raise ProblemError(f"singular KKT system: rank defect {n + r - rank}")
    rhs = np.concatenate([Q1 @ d1 - D.offset, np.zeros(r)])
    sol = np.linalg.solve(kkt, rhs)
    return ProblemInstance(
        "saddle_composite", A1, D, B, C, K=Km, A2=A2, oracle=sol[:n],
        certificate="dense KKT solve",
        params={"Q1": Q1, "d1": d1, "Q2": Q2, "K": Km.matrix, "L": Lm},
    )


def _feasible_point(pr: ProblemInstance, z):
    if isinstance(pr.A, NormalCone):
        return project_intersection([pr.C, pr.A.C], z)
    return pr.C.project(z)


def verify_oracle(pr: ProblemInstance, x_star=None, tol=1e-9, n_samples=500, rng=None) -> bool:
    """Check ``<w, u - x*> >= -tol`` on sampled graph points ``(u, w)`` of ``A + D + N_C``.

    A point is a zero of a maximal monotone operator iff the inequality holds
    on the whole graph; sampling a finite family gives a necessary check.
    Composite problems include ``K* A2 K`` in the sampled operator.
    """
    x_star = pr.oracle if x_star is None else as_vector(x_star, pr.dim, "x_star")
    if x_star is None:
        raise UsageError("problem has no oracle")
    rng = np.random.default_rng(0) if rng is None else rng
    n = pr.dim
    for i in range(n_samples):
        radius = 10.0 ** rng.uniform(-3, 1)
        if i % 5 == 0:
            z = 10.0 * rng.standard_normal(n)
        else:
            z = x_star + radius * rng.standard_normal(n)
        u = _feasible_point(pr, z)
        scale = 10.0 ** rng.uniform(-2, 2)
        w = pr.A.sample_graph_element(u, rng, scale) + pr.D.eval(u)
        if pr.K is not None:
            ku = pr.K.matrix @ u
            w = w + pr.K.adjoint_matrix @ pr.A2.sample_graph_element(ku, rng, scale)
        w = w + pr.C.sample_normal(u, rng, scale)
        if float(w @ (u - x_star)) < -tol:
            return False
    return True


# name -> (builder, {param: (kind, required)})
def _build_quadratic(p):
    box = None
    if "box_lo" in p or "box_hi" in p:
        dim = p["d"].size
        box = (p.get("box_lo", -math.inf), p.get("box_hi", math.inf))
        box = Box(box[0], box[1], dim)
    return make_quadratic_over_nullspace(p["d"], p["L"], box)


def _build_strongly(p):
    dim = p["target"].size
    C = Box(p.get("c_lo", 0.0), p.get("c_hi", math.inf), dim)
    return make_strongly_monotone(p["gamma"], p["target"], C)


def _build_saddle(p):
    D = SkewLinear(p["skew"]) if "skew" in p else None
    return make_saddle_composite(p["Q1"], p["d1"], p["Q2"], p["K"], p["L"], D)


PROBLEMS = {
    "quadratic_over_nullspace": (
        _build_quadratic,
        {"d": ("vector", True), "L": ("matrix", True), "box_lo": ("vector", False),
         "box_hi": ("vector", False)},
    ),
    "strongly_monotone": (
        _build_strongly,
        {"gamma": ("float", True), "target": ("vector", True), "c_lo": ("vector", False),
         "c_hi": ("vector", False)},
    ),
    "saddle_composite": (
        _build_saddle,
        {"Q1": ("matrix", True), "d1": ("vector", True), "Q2": ("matrix", True),
         "K": ("matrix", True), "L": ("matrix", True), "skew": ("matrix", False)},
    ),
}
# accepted by every problem: replace A (or A1) by a resolvent callback "module:function"
COMMON_PARAMS = {"a_resolvent": ("callable", False)}


def build_problem(name: str, params: dict) -> ProblemInstance:
    if name not in PROBLEMS:
        raise UsageError(f"unknown problem {name!r}")
    builder, _ = PROBLEMS[name]
    pr = builder(params)
    if "a_resolvent" in params:
        pr.A = UserResolvent(params["a_resolvent"], pr.A.dim)
        pr.oracle = None
        pr.certificate = ""
    return pr
