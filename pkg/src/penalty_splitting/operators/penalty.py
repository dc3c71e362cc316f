"""Penalty-gap quantity ``sup_{u in C} phi_B(u, p/beta) - sigma_C(p/beta)``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, UnsupportedError, UsageError
from ..hilbert import as_vector
from .catalog import AffineMonotone, MonotoneOperator, NormalCone
from .functions import ConvexFunction
from .sets import ConvexSet


@dataclass(frozen=True)
class PenaltyGap:
    """Gap value, flagged ``exact=False`` when it is the ``f + f*`` upper bound."""

    value: float
    exact: bool

    def __float__(self):
        return self.value


def penalty_gap(B, C: ConvexSet, p, beta: float) -> PenaltyGap:
    """Evaluate the penalty gap for a dual vector ``p`` in ran N_C.

    ``B`` is either a catalog operator with ``zer B = C`` or a convex function
    ``f`` (standing for ``B = df`` with ``C = argmin f`` and ``min f = 0``).

    For affine monotone ``B`` the Fitzpatrick function is constant along
    ``zer B``, so the supremum over ``C`` is attained at any zero and the
    result is exact. Operators with a known potential and convex-function
    descriptors fall back to ``f(u) + f*(s)``, which vanishes in ``f(u)`` on
    ``C`` and yields an upper bound.
    """
    beta = float(beta)
    if not beta > 0:
        raise UsageError("beta must be positive")
    p = as_vector(p, C.dim, name="p")
    if not C.normal_range_contains(p):
        raise DomainError("p is not in the range of the normal cone of C")
    s = p / beta
    sigma = C.support(s)

    if isinstance(B, ConvexFunction):
        return _bound_gap(B, s, sigma)
    if not isinstance(B, MonotoneOperator):
        raise UsageError("B must be a MonotoneOperator or a ConvexFunction")
    if B.dim != C.dim:
        raise UsageError("B and C live in different dimensions")

    if isinstance(B, AffineMonotone):
        u0 = np.linalg.lstsq(B.matrix, -B.offset, rcond=None)[0]
        if np.linalg.norm(B.eval(u0)) > 1e-9 * max(1.0, float(np.linalg.norm(B.offset))):
            raise UsageError("zer B is empty")
        if not C.contains(u0, 1e-9):
            raise UsageError("C is not the zero set of B")
        phi = B.fitzpatrick(u0, s)
        return PenaltyGap(_gap(phi, sigma), exact=True)
    if isinstance(B, NormalCone):
        # phi = iota_D(u) + sigma_D(s) and D = C, so the gap vanishes
        return PenaltyGap(0.0, exact=True)
    if B.potential is not None:
        return _bound_gap(B.potential, s, sigma)
    raise UnsupportedError(f"no penalty-gap formula for {B.kind}")


def _gap(phi, sigma):
    if math.isinf(phi):
        return math.inf
    if math.isinf(sigma):
        # s in ran N_C keeps sigma_C(s) finite; guard anyway
        raise DomainError("support function is infinite at p/beta")
    return phi - sigma


def _bound_gap(f: ConvexFunction, s, sigma) -> PenaltyGap:
    conj = f.conjugate(s)
    return PenaltyGap(_gap(conj, sigma), exact=False)
