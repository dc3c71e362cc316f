"""Convex functions with closed-form conjugates.

These descriptors stand for penalty potentials ``f`` whose subdifferential
``B = df`` describes the constraint set ``C = argmin f``. Each catalog member
has ``min f = 0``, so ``f`` vanishes on ``C``.
"""

from __future__ import annotations

import math

import numpy as np

from ..hilbert import as_matrix, as_vector
from .linalg import PsdSplit
from .sets import ConvexSet, Subspace

__all__ = [
    "ConvexFunction",
    "SquaredNormComposite",
    "HalfSquaredNorm",
    "L1Norm",
    "HalfSquaredDistance",
    "fitzpatrick_upper_bound",
]


class ConvexFunction:
    dim: int

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def conjugate(self, u: np.ndarray) -> float:
        raise NotImplementedError

    def subdifferential(self):
        """The maximal monotone operator ``df``."""
        raise NotImplementedError

    def argmin_set(self) -> ConvexSet:
        raise NotImplementedError

    def sample_subgradient(self, x, rng):
        return self.subdifferential().sample_graph_element(x, rng)


class SquaredNormComposite(ConvexFunction):
    """``f(x) = ||L x||^2`` with ``f*(y) = <y, (L*L)^+ y> / 4`` on ran L*."""

    def __init__(self, L):
        from ..hilbert import LinearMap

        self.L = L.matrix if isinstance(L, LinearMap) else as_matrix(L, "L")
        self.dim = self.L.shape[1]
        self._gram = PsdSplit(self.L.T @ self.L)

    def value(self, x):
        r = self.L @ x
        return float(r @ r)

    def conjugate(self, u):
        return self._gram.conjugate_quadratic(u)

    def subdifferential(self):
        from .catalog import AffineGradient

        op = AffineGradient(2.0 * self.L.T @ self.L, np.zeros(self.dim))
        op.potential = self
        return op

    def argmin_set(self):
        return Subspace(self.L)


class HalfSquaredNorm(ConvexFunction):
    def __init__(self, dim=1):
        self.dim = int(dim)

    def value(self, x):
        return 0.5 * float(x @ x)

    def conjugate(self, u):
        return 0.5 * float(u @ u)

    def subdifferential(self):
        from .catalog import Identity

        op = Identity(self.dim)
        op.potential = self
        return op

    def argmin_set(self):
        from .sets import Singleton

        return Singleton(np.zeros(self.dim))


class L1Norm(ConvexFunction):
    """``f(x) = sum |x_i|``; its conjugate is the indicator of the unit cube."""

    def __init__(self, dim=1):
        self.dim = int(dim)

    def value(self, x):
        return float(np.sum(np.abs(x)))

    def conjugate(self, u):
        return 0.0 if np.all(np.abs(u) <= 1.0) else math.inf

    def subdifferential(self):
        from .catalog import AbsValue

        return AbsValue(self.dim)

    def argmin_set(self):
        from .sets import Singleton

        return Singleton(np.zeros(self.dim))


class HalfSquaredDistance(ConvexFunction):
    """``f(x) = dist(x, C)^2 / 2`` with ``f* = sigma_C + ||.||^2 / 2``."""

    def __init__(self, C: ConvexSet):
        self.C = C
        self.dim = C.dim

    def value(self, x):
        r = x - self.C.project(x)
        return 0.5 * float(r @ r)

    def conjugate(self, u):
        s = self.C.support(u)
        if math.isinf(s):
            return s
        return s + 0.5 * float(u @ u)

    def subdifferential(self):
        from .catalog import DistanceGradient

        return DistanceGradient(self.C)

    def argmin_set(self):
        return self.C


def fitzpatrick_upper_bound(f: ConvexFunction, x, u) -> float:
    """Certified upper bound ``f(x) + f*(u)`` on the Fitzpatrick function of ``df``.

    Returns ``math.inf`` when ``u`` lies outside the domain of ``f*``.
    """
    x = as_vector(x, f.dim)
    u = as_vector(u, f.dim, name="u")
    conj = f.conjugate(u)
    if math.isinf(conj):
        return math.inf
    return f.value(x) + conj

