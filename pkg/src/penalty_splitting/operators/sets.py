"""Closed convex sets with their projections and support functions."""

from __future__ import annotations

import math

import numpy as np

from ..errors import UsageError
from ..hilbert import as_matrix, as_vector
from .linalg import RANGE_RTOL, null_space, row_space

__all__ = [
    "ConvexSet",
    "Box",
    "Subspace",
    "Singleton",
    "Ball",
    "WholeSpace",
    "project",
    "support_function",
    "project_intersection",
]

CONTAIN_TOL = 1e-10


class ConvexSet:
    """Nonempty closed convex subset of R^d."""

    dim: int

    def project(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def support(self, u: np.ndarray) -> float:
        raise NotImplementedError

    def contains(self, x: np.ndarray, tol: float = CONTAIN_TOL) -> bool:
        raise NotImplementedError

    def support_prox(self, s: float, x: np.ndarray) -> np.ndarray:
        """Proximal map of ``s * sigma_C``, i.e. the resolvent of ``s * N_C^{-1}``."""
        raise NotImplementedError

    def normal_range_contains(self, p: np.ndarray) -> bool:
        """Whether ``p`` belongs to the range of the normal cone ``N_C``."""
        raise NotImplementedError

    def sample_normal(self, u: np.ndarray, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        """A random element of ``N_C(u)`` for ``u`` in the set."""
        raise NotImplementedError


class Box(ConvexSet):
    """Axis-aligned box ``{x : lo <= x <= hi}``; bounds may be infinite."""

    def __init__(self, lo, hi, dim=None):
        lo = np.asarray(lo, dtype=float).reshape(-1)
        hi = np.asarray(hi, dtype=float).reshape(-1)
        n = dim if dim is not None else max(lo.size, hi.size)
        if lo.size == 1:
            lo = np.full(n, lo[0])
        if hi.size == 1:
            hi = np.full(n, hi[0])
        if lo.shape != hi.shape or lo.size == 0:
            raise UsageError("box bounds must have equal, nonzero length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise UsageError("box must satisfy lo <= hi")
        if np.any(lo == math.inf) or np.any(hi == -math.inf):
            raise UsageError("box would be empty")
        self.lo, self.hi = lo, hi
        self.dim = lo.size

    def __repr__(self):
        return f"Box(lo={self.lo.tolist()}, hi={self.hi.tolist()})"

    def project(self, x):
        return np.clip(x, self.lo, self.hi)

    def support(self, u):
        total = 0.0
        for ui, lo, hi in zip(u, self.lo, self.hi):
            if ui > 0:
                total += ui * hi
            elif ui < 0:
                total += ui * lo
        return total

    def contains(self, x, tol=CONTAIN_TOL):
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def support_prox(self, s, x):
        y = np.zeros_like(x)
        up = x > s * self.hi
        down = x < s * self.lo
        y[up] = x[up] - s * self.hi[up]
        y[down] = x[down] - s * self.lo[down]
        return y

    def normal_range_contains(self, p):
        return bool(np.all((p <= 0) | np.isfinite(self.hi)) and np.all((p >= 0) | np.isfinite(self.lo)))

    def sample_normal(self, u, rng, scale=1.0):
        at_hi = np.isclose(u, self.hi, rtol=0, atol=CONTAIN_TOL)
        at_lo = np.isclose(u, self.lo, rtol=0, atol=CONTAIN_TOL)
        t = scale * np.abs(rng.standard_normal(self.dim))
        p = np.zeros(self.dim)
        p[at_hi] = t[at_hi]
        p[at_lo] = -t[at_lo]
        both = at_hi & at_lo
        p[both] = scale * rng.standard_normal(int(both.sum()))
        return p


class Subspace(ConvexSet):
    """Null space ``{x : L x = 0}`` of a linear map ``L``."""

    def __init__(self, L):
        from ..hilbert import LinearMap

        m = L.matrix if isinstance(L, LinearMap) else as_matrix(L, "L")
        self.L = m
        self.dim = m.shape[1]
        self.basis = null_space(m)
        self.complement = row_space(m)

    def __repr__(self):
        return f"Subspace(null of L={self.L.tolist()})"

    def project(self, x):
        return self.basis @ (self.basis.T @ x)

    def _orthogonal(self, u):
        off = np.linalg.norm(self.basis.T @ u)
        return off <= RANGE_RTOL * max(1.0, float(np.linalg.norm(u)))

    def support(self, u):
        return 0.0 if self._orthogonal(u) else math.inf

    def contains(self, x, tol=CONTAIN_TOL):
        return float(np.linalg.norm(self.complement.T @ x)) <= tol * max(1.0, float(np.linalg.norm(x)))

    def support_prox(self, s, x):
        return self.complement @ (self.complement.T @ x)

    def normal_range_contains(self, p):
        return self._orthogonal(p)

    def sample_normal(self, u, rng, scale=1.0):
        k = self.complement.shape[1]
        return scale * (self.complement @ rng.standard_normal(k))


class Singleton(ConvexSet):
    def __init__(self, c):
        self.c = as_vector(c, name="c")
        self.dim = self.c.size

    def __repr__(self):
        return f"Singleton({self.c.tolist()})"

    def project(self, x):
        return self.c.copy()

    def support(self, u):
        return float(self.c @ u)

    def contains(self, x, tol=CONTAIN_TOL):
        return float(np.linalg.norm(x - self.c)) <= tol * max(1.0, float(np.linalg.norm(self.c)))

    def support_prox(self, s, x):
        return x - s * self.c

    def normal_range_contains(self, p):
        return True

    def sample_normal(self, u, rng, scale=1.0):
        return scale * rng.standard_normal(self.dim)


class Ball(ConvexSet):
    def __init__(self, center, radius):
        self.center = as_vector(center, name="center")
        self.radius = float(radius)
        if not self.radius >= 0:
            raise UsageError("ball radius must be nonnegative")
        self.dim = self.center.size

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"

    def project(self, x):
        r = x - self.center
        dist = np.linalg.norm(r)
        if dist <= self.radius:
            return x.copy()
        return self.center + (self.radius / dist) * r

    def support(self, u):
        return float(self.center @ u) + self.radius * float(np.linalg.norm(u))

    def contains(self, x, tol=CONTAIN_TOL):
        return float(np.linalg.norm(x - self.center)) <= self.radius * (1 + tol) + tol

    def support_prox(self, s, x):
        y = x - s * self.center
        ny = np.linalg.norm(y)
        if ny <= s * self.radius:
            return np.zeros_like(y)
        return (1.0 - s * self.radius / ny) * y

    def normal_range_contains(self, p):
        return True

    def sample_normal(self, u, rng, scale=1.0):
        r = u - self.center
        dist = np.linalg.norm(r)
        if self.radius == 0.0:
            return scale * rng.standard_normal(self.dim)
        if abs(dist - self.radius) > CONTAIN_TOL * max(1.0, self.radius):
            return np.zeros(self.dim)
        return scale * abs(rng.standard_normal()) * r / dist


class WholeSpace(ConvexSet):
    def __init__(self, dim):
        self.dim = int(dim)

    def __repr__(self):
        return f"WholeSpace({self.dim})"

    def project(self, x):
        return x.copy()

    def support(self, u):
        return 0.0 if not np.any(u) else math.inf

    def contains(self, x, tol=CONTAIN_TOL):
        return True

    def support_prox(self, s, x):
        return np.zeros_like(x)

    def normal_range_contains(self, p):
        return not np.any(p)

    def sample_normal(self, u, rng, scale=1.0):
        return np.zeros(self.dim)


def project(C: ConvexSet, x) -> np.ndarray:
    """Nearest point of ``C`` to ``x``."""
    return C.project(as_vector(x, C.dim))


def support_function(C: ConvexSet, u) -> float:
    """``sigma_C(u) = sup_{y in C} <y, u>``; may be ``math.inf``."""
    return C.support(as_vector(u, C.dim, name="u"))


def project_intersection(sets, x, tol=1e-13, max_iter=1_000_000) -> np.ndarray:
    """Projection onto an intersection of convex sets by Dykstra's algorithm.

    Stops when a full sweep changes neither the iterate nor the correction
    terms by more than ``tol`` (relative to ``max(1, ||x||)``) and every set
    contains the iterate. The iterate alone can stall for a sweep while the
    corrections are still moving, so both are checked.

    Corrections grow linearly when the intersection is empty; the loop then
    returns early with an iterate outside some set, which callers detect with
    ``contains``.
    """
    y = np.asarray(x, dtype=float).copy()
    if len(sets) == 1:
        return sets[0].project(y)
    incs = [np.zeros_like(y) for _ in sets]
    scale = max(1.0, float(np.linalg.norm(y)))
    checkpoint, last_size = 1000, None
    for k in range(1, max_iter + 1):
        start = y.copy()
        moved = 0.0
        for i, C in enumerate(sets):
            z = C.project(y + incs[i])
            inc = y + incs[i] - z
            moved += float(np.linalg.norm(inc - incs[i]))
            incs[i] = inc
            y = z
        moved += float(np.linalg.norm(y - start))
        if moved <= tol * scale and all(C.contains(y, 10 * tol) for C in sets):
            return y
        if k == checkpoint:
            size = max(float(np.linalg.norm(i)) for i in incs)
            if last_size is not None and size > 100.0 * scale and size > 1.9 * last_size:
                return y
            checkpoint, last_size = 2 * checkpoint, size
    return y
