"""Catalog of maximal monotone operators.

Every operator exposes its resolvent ``J_{lam M} = (Id + lam M)^{-1}``. Single
valued kinds also expose ``eval``; set-valued kinds expose a deterministic
minimal-norm ``selection`` instead. Operators are immutable after
construction, so evaluations are safe to share between threads.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from ..errors import ContractViolation, DomainError, UnsupportedError, UsageError
from ..hilbert import LinearMap, as_matrix, as_vector, operator_norm
from .linalg import PsdSplit
from .sets import Ball, Box, ConvexSet, Singleton, Subspace

__all__ = [
    "MonotoneOperator",
    "AffineMonotone",
    "Zero",
    "Identity",
    "ScaledIdentity",
    "Quadratic",
    "AffineGradient",
    "SkewLinear",
    "AbsValue",
    "NormalCone",
    "NormalConeBox",
    "NormalConeSubspace",
    "NormalConeSingleton",
    "NormalConeBall",
    "DistanceGradient",
    "ProductOperator",
    "CouplingOperator",
    "PenaltyLift",
    "UserResolvent",
    "resolvent",
    "inverse_resolvent",
    "evaluate",
    "selection",
    "fitzpatrick",
    "check_moduli",
]


class MonotoneOperator:
    """Base class for maximal monotone operators on R^dim.

    Attributes
    ----------
    cocoercivity : float or None
        Declared constant ``eta`` with ``<x-y, Mx-My> >= eta ||Mx-My||^2``;
        ``math.inf`` for the zero map.
    lipschitz : float or None
        Declared Lipschitz constant of a single-valued operator.
    strong_monotonicity : float or None
        Declared ``gamma`` with ``<x-y, u-v> >= gamma ||x-y||^2`` on the graph.
    potential : ConvexFunction or None
        Convex function ``f`` with ``M = df`` when known.
    """

    kind = "operator"
    single_valued = True
    dim: int
    cocoercivity = None
    lipschitz = None
    strong_monotonicity = None
    potential = None

    def resolvent(self, lam: float, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def eval(self, x: np.ndarray) -> np.ndarray:
        raise UsageError(f"{self.kind} is set-valued; use selection() to pick an element of Mx")

    def selection(self, x: np.ndarray) -> np.ndarray:
        return self.eval(x)

    def in_domain(self, x: np.ndarray) -> bool:
        return True

    def fitzpatrick(self, x: np.ndarray, u: np.ndarray) -> float:
        raise UnsupportedError(
            f"no closed-form Fitzpatrick function for {self.kind}; use fitzpatrick_upper_bound"
        )

    def inverse_resolvent_direct(self, gamma: float, x: np.ndarray) -> np.ndarray:
        """Resolvent of ``gamma * M^{-1}`` by a formula independent of ``resolvent``."""
        raise UnsupportedError(f"no direct inverse resolvent for {self.kind}")

    def sample_graph_element(self, x, rng, scale=1.0) -> np.ndarray:
        """A (possibly random) element of ``Mx``; defaults to the selection."""
        return self.selection(x)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class AffineMonotone(MonotoneOperator):
    """Affine monotone map ``x -> M x + b`` (``M + M^T`` positive semidefinite)."""

    kind = "affine"

    def __init__(self, matrix, offset=None):
        m = as_matrix(matrix, "M")
        if m.shape[0] != m.shape[1]:
            raise UsageError(f"monotone operator matrix must be square, got {m.shape}")
        self.matrix = m
        self.dim = m.shape[0]
        self.offset = np.zeros(self.dim) if offset is None else as_vector(offset, self.dim, "offset")
        sym = 0.5 * (m + m.T)
        self.symmetric = bool(np.allclose(m, m.T, rtol=0, atol=1e-14 * max(1.0, np.abs(m).max())))
        self._sym = PsdSplit(sym)
        w = np.linalg.eigvalsh(sym)
        scale = max(1.0, float(np.abs(w).max()))
        if w.size and w[0] < -1e-10 * scale:
            raise UsageError("operator is not monotone: symmetric part has a negative eigenvalue")
        nrm = operator_norm(m)
        self.lipschitz = nrm
        if not np.any(m):
            self.cocoercivity = math.inf
        elif self.symmetric:
            self.cocoercivity = 1.0 / nrm
        if w.size and w[0] > 1e-12 * scale:
            self.strong_monotonicity = float(w[0])

    def __repr__(self):
        return f"{type(self).__name__}(matrix={self.matrix.tolist()}, offset={self.offset.tolist()})"

    @cached_property
    def _eig(self):
        w, v = np.linalg.eigh(0.5 * (self.matrix + self.matrix.T))
        return w, v

    def eval(self, x):
        return self.matrix @ x + self.offset

    def resolvent(self, lam, x):
        rhs = x - lam * self.offset
        if self.symmetric:
            w, v = self._eig
            return v @ ((v.T @ rhs) / (1.0 + lam * w))
        return np.linalg.solve(np.eye(self.dim) + lam * self.matrix, rhs)

    def fitzpatrick(self, x, u):
        # sup_y <x, My+b> + <y, u> - <y, My+b> = <x,b> + sup_y <y, g> - <y, S y>
        g = self.matrix.T @ x + u - self.offset
        scale = float(np.linalg.norm(u)) + float(np.linalg.norm(self.matrix.T @ x)) + float(np.linalg.norm(self.offset))
        q = self._sym.conjugate_quadratic(g, scale)
        if math.isinf(q):
            return math.inf
        return float(x @ self.offset) + q

    def inverse_resolvent_direct(self, gamma, x):
        # y = Mz + b and y + gamma z = x
        z = np.linalg.solve(self.matrix + gamma * np.eye(self.dim), x - self.offset)
        return x - gamma * z


class Zero(AffineMonotone):
    kind = "zero"

    def __init__(self, dim=1):
        super().__init__(np.zeros((dim, dim)))

    def __repr__(self):
        return f"Zero(dim={self.dim})"

    def eval(self, x):
        return np.zeros_like(x)

    def resolvent(self, lam, x):
        return x.copy()

    def inverse_resolvent_direct(self, gamma, x):
        # Zero^{-1} is the normal cone of {0}
        return np.zeros_like(x)


class Identity(AffineMonotone):
    kind = "identity"

    def __init__(self, dim=1):
        super().__init__(np.eye(dim))

    def __repr__(self):
        return f"Identity(dim={self.dim})"

    def resolvent(self, lam, x):
        return x / (1.0 + lam)

    def inverse_resolvent_direct(self, gamma, x):
        return x / (1.0 + gamma)


class ScaledIdentity(AffineMonotone):
    """``x -> gamma (x - center)``, strongly monotone with modulus ``gamma``."""

    kind = "scaled_identity"

    def __init__(self, gamma, dim=1, center=None):
        gamma = float(gamma)
        if not gamma > 0:
            raise UsageError("ScaledIdentity requires gamma > 0")
        if center is not None:
            center = as_vector(center, name="center")
            dim = center.size
        else:
            center = np.zeros(dim)
        self.gamma = gamma
        self.center = center
        super().__init__(gamma * np.eye(dim), -gamma * center)

    def __repr__(self):
        return f"ScaledIdentity(gamma={self.gamma}, center={self.center.tolist()})"

    def resolvent(self, lam, x):
        return (x + lam * self.gamma * self.center) / (1.0 + lam * self.gamma)


def _require_symmetric(m, what):
    if not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(1.0, np.abs(m).max())):
        raise UsageError(f"{what} must be symmetric")


class Quadratic(AffineMonotone):
    """Gradient of ``x -> <x, Qx>/2 + <b, x>`` with ``Q`` symmetric PSD."""

    kind = "subdifferential_quadratic"

    def __init__(self, Q, b=None):
        Q = as_matrix(Q, "Q")
        _require_symmetric(Q, "Q")
        super().__init__(Q, b)

    def __repr__(self):
        return f"Quadratic(Q={self.matrix.tolist()}, b={self.offset.tolist()})"


class AffineGradient(AffineMonotone):
    """``x -> P (x - d)`` with ``P`` symmetric PSD."""

    kind = "affine_gradient"

    def __init__(self, P, d=None):
        P = as_matrix(P, "P")
        _require_symmetric(P, "P")
        d = np.zeros(P.shape[0]) if d is None else as_vector(d, P.shape[0], "d")
        self.d = d
        super().__init__(P, -(P @ d))

    def __repr__(self):
        return f"AffineGradient(P={self.matrix.tolist()}, d={self.d.tolist()})"


class SkewLinear(AffineMonotone):
    """Skew linear map ``x -> S x`` with ``S = -S^T``; monotone, never cocoercive unless zero."""

    kind = "skew_linear"

    def __init__(self, S):
        S = as_matrix(S, "S")
        if not np.allclose(S, -S.T, rtol=0, atol=1e-12 * max(1.0, np.abs(S).max())):
            raise UsageError("SkewLinear requires S = -S^T")
        super().__init__(S)

    def __repr__(self):
        return f"SkewLinear(S={self.matrix.tolist()})"


class AbsValue(MonotoneOperator):
    """Subdifferential of the l1 norm (``|.|`` componentwise)."""

    kind = "subdifferential_abs"
    single_valued = False

    def __init__(self, dim=1):
        self.dim = int(dim)

    @property
    def potential(self):
        from .functions import L1Norm

        return L1Norm(self.dim)

    def resolvent(self, lam, x):
        return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)

    def selection(self, x):
        return np.sign(x)

    def sample_graph_element(self, x, rng, scale=1.0):
        u = np.sign(x)
        kink = x == 0
        u[kink] = rng.uniform(-1.0, 1.0, int(kink.sum()))
        return u

    def inverse_resolvent_direct(self, gamma, x):
        # (d|.|)^{-1} is the normal cone of [-1, 1]^d
        return np.clip(x, -1.0, 1.0)


class NormalCone(MonotoneOperator):
    """Normal cone ``N_C`` of a closed convex set; its resolvent is the projection."""

    kind = "normal_cone"
    single_valued = False

    def __init__(self, C: ConvexSet):
        self.C = C
        self.dim = C.dim

    def __repr__(self):
        return f"NormalCone({self.C!r})"

    def in_domain(self, x):
        return self.C.contains(x)

    def resolvent(self, lam, x):
        return self.C.project(x)

    def selection(self, x):
        if not self.C.contains(x):
            raise DomainError(f"point is outside {self.C!r}, so N_C(x) is empty")
        return np.zeros_like(x)

    def sample_graph_element(self, x, rng, scale=1.0):
        if not self.C.contains(x):
            raise DomainError(f"point is outside {self.C!r}, so N_C(x) is empty")
        return self.C.sample_normal(x, rng, scale)

    def fitzpatrick(self, x, u):
        # graph {(y, v): y in C, v in N_C(y)} gives iota_C(x) + sigma_C(u)
        if not self.C.contains(x):
            return math.inf
        return self.C.support(u)

    def inverse_resolvent_direct(self, gamma, x):
        return self.C.support_prox(gamma, x)


def NormalConeBox(lo, hi, dim=None) -> NormalCone:
    return NormalCone(Box(lo, hi, dim))


def NormalConeSubspace(L) -> NormalCone:
    """Normal cone of ``C = zer L``."""
    return NormalCone(Subspace(L))


def NormalConeSingleton(c) -> NormalCone:
    return NormalCone(Singleton(c))


def NormalConeBall(center, radius) -> NormalCone:
    return NormalCone(Ball(center, radius))


class DistanceGradient(MonotoneOperator):
    """``x -> x - P_C x``, the gradient of ``dist(., C)^2 / 2``; 1-cocoercive with zeros ``C``."""

    kind = "distance_gradient"
    cocoercivity = 1.0
    lipschitz = 1.0

    def __init__(self, C: ConvexSet):
        self.C = C
        self.dim = C.dim

    def __repr__(self):
        return f"DistanceGradient({self.C!r})"

    @property
    def potential(self):
        from .functions import HalfSquaredDistance

        return HalfSquaredDistance(self.C)

    def eval(self, x):
        return x - self.C.project(x)

    def resolvent(self, lam, x):
        return (x + lam * self.C.project(x)) / (1.0 + lam)

    def inverse_resolvent_direct(self, gamma, x):
        # B^{-1} = d(sigma_C + ||.||^2/2)
        return self.C.support_prox(gamma / (1.0 + gamma), x / (1.0 + gamma))


class ProductOperator(MonotoneOperator):
    """``(x, v) -> A1 x  times  A2^{-1} v`` on the product space.

    The second block is resolved through the Moreau identity, so only a
    resolvent of ``A2`` is required.
    """

    kind = "product"
    single_valued = False

    def __init__(self, A1: MonotoneOperator, A2: MonotoneOperator):
        self.A1, self.A2 = A1, A2
        self.dim = A1.dim + A2.dim

    def __repr__(self):
        return f"ProductOperator({self.A1!r}, inverse of {self.A2!r})"

    def split(self, z):
        return z[: self.A1.dim], z[self.A1.dim :]

    def resolvent(self, lam, z):
        x, v = self.split(z)
        return np.concatenate([self.A1.resolvent(lam, x), inverse_resolvent(self.A2, lam, v)])

    def inverse_resolvent_direct(self, gamma, z):
        x, v = self.split(z)
        return np.concatenate([self.A1.inverse_resolvent_direct(gamma, x), self.A2.resolvent(gamma, v)])


class CouplingOperator(MonotoneOperator):
    """``(x, v) -> (Dx + K* v, -K x)``: a single-valued monotone map on the product space.

    Its Lipschitz constant ``sqrt(2 (L_D^2 + ||K||^2))`` uses the Lipschitz
    constant ``L_D`` of ``D``.
    """

    kind = "coupling"

    def __init__(self, D: MonotoneOperator, K: LinearMap):
        if K.dim_in != D.dim:
            raise UsageError("K must map the primal space of D")
        self.D, self.K = D, K
        self.dim = D.dim + K.dim_out
        lip_d = D.lipschitz if D.lipschitz is not None else math.inf
        self.lipschitz = math.sqrt(2.0 * (lip_d**2 + operator_norm(K) ** 2))

    def eval(self, z):
        x, v = z[: self.D.dim], z[self.D.dim :]
        return np.concatenate([self.D.eval(x) + self.K.adjoint_matrix @ v, -(self.K.matrix @ x)])

    def resolvent(self, lam, z):
        raise UnsupportedError("the coupling operator is only used as a forward operator")


class PenaltyLift(MonotoneOperator):
    """``(x, v) -> (Bx, 0)``; its zeros are ``zer B`` times the dual space."""

    kind = "penalty_lift"

    def __init__(self, B: MonotoneOperator, dual_dim: int):
        self.B = B
        self.dual_dim = int(dual_dim)
        self.dim = B.dim + self.dual_dim
        self.lipschitz = B.lipschitz
        self.cocoercivity = B.cocoercivity

    def eval(self, z):
        return np.concatenate([self.B.eval(z[: self.B.dim]), np.zeros(self.dual_dim)])

    def resolvent(self, lam, z):
        x, v = z[: self.B.dim], z[self.B.dim :]
        return np.concatenate([self.B.resolvent(lam, x), v])


class UserResolvent(MonotoneOperator):
    """Operator known only through a resolvent callback ``callback(lam, x)``.

    The callback must be reentrant and return a vector of the same dimension.
    """

    kind = "user_resolvent"
    single_valued = False

    def __init__(self, callback, dim):
        self.callback = callback
        self.dim = int(dim)

    def __repr__(self):
        return f"UserResolvent({getattr(self.callback, '__name__', self.callback)!r}, dim={self.dim})"

    def resolvent(self, lam, x):
        y = np.asarray(self.callback(lam, x), dtype=float)
        if y.ndim == 0:
            y = y.reshape(1)
        if y.shape != (self.dim,):
            raise ContractViolation(
                f"resolvent callback returned shape {y.shape}, expected ({self.dim},)"
            )
        return y

    def selection(self, x):
        raise UnsupportedError("a resolvent-only operator has no selection")


def _positive(value, name):
    value = float(value)
    if not value > 0 or math.isinf(value):
        raise UsageError(f"{name} must be a positive finite real, got {value}")
    return value


def resolvent(M: MonotoneOperator, lam: float, x) -> np.ndarray:
    """``J_{lam M}(x)``: the unique ``y`` with ``x in y + lam M y``."""
    lam = _positive(lam, "lambda")
    return M.resolvent(lam, as_vector(x, M.dim))


def inverse_resolvent(M: MonotoneOperator, gamma: float, x) -> np.ndarray:
    """``J_{gamma M^{-1}}(x) = x - gamma J_{M/gamma}(x / gamma)`` (Moreau decomposition)."""
    gamma = _positive(gamma, "gamma")
    x = np.asarray(x, dtype=float)
    return x - gamma * M.resolvent(1.0 / gamma, x / gamma)


def evaluate(M: MonotoneOperator, x) -> np.ndarray:
    """``Mx`` for a single-valued operator."""
    return M.eval(as_vector(x, M.dim))


def selection(M: MonotoneOperator, x) -> np.ndarray:
    """Deterministic minimal-norm element of ``Mx``."""
    x = as_vector(x, M.dim)
    if not M.in_domain(x):
        raise DomainError("point is outside dom M")
    return M.selection(x)


def fitzpatrick(M: MonotoneOperator, x, u) -> float:
    """Closed-form Fitzpatrick function ``phi_M(x, u)``; ``math.inf`` where unbounded."""
    return M.fitzpatrick(as_vector(x, M.dim), as_vector(u, M.dim, name="u"))


def check_moduli(M: MonotoneOperator, rng=None, n_pairs=200, tol=1e-10, scale=1.0) -> bool:
    """Randomized audit of monotonicity and the declared moduli of a single-valued operator."""
    rng = np.random.default_rng(0) if rng is None else rng
    for _ in range(n_pairs):
        x = scale * rng.standard_normal(M.dim)
        y = scale * rng.standard_normal(M.dim)
        mx, my = M.eval(x), M.eval(y)
        dx, dm = x - y, mx - my
        ip = float(dx @ dm)
        nm2 = float(dm @ dm)
        slack = tol * max(1.0, float(dx @ dx), nm2)
        if ip < -slack:
            return False
        eta = M.cocoercivity
        if eta is not None and not math.isinf(eta) and ip < eta * nm2 - slack:
            return False
        if eta is not None and math.isinf(eta) and nm2 > slack:
            return False
        lip = M.lipschitz
        if lip is not None and math.sqrt(nm2) > lip * math.sqrt(float(dx @ dx)) + slack:
            return False
        gam = M.strong_monotonicity
        if gam is not None and ip < gam * float(dx @ dx) - slack:
            return False
    return True

