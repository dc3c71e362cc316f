"""Rank-revealing helpers shared by the operator catalog."""

from __future__ import annotations

import math

import numpy as np

# singular/eigen values below RANK_RTOL * largest are treated as zero
RANK_RTOL = 1e-10
RANGE_RTOL = 1e-10


class PsdSplit:
    """Eigen-split of a symmetric positive semidefinite matrix.

    Keeps an orthonormal basis of the range and of the null space so that
    pseudo-inverse quadratic forms and range membership can be evaluated
    without forming ``pinv`` explicitly.
    """

    def __init__(self, p: np.ndarray):
        p = 0.5 * (p + p.T)
        w, v = np.linalg.eigh(p)
        top = max(float(np.max(np.abs(w))), 0.0) if w.size else 0.0
        keep = w > RANK_RTOL * top if top > 0 else np.zeros(w.shape, dtype=bool)
        self.eigvals = w[keep]
        self.range_basis = v[:, keep]
        self.null_basis = v[:, ~keep]
        self.rank = int(keep.sum())
        self.top = top

    def in_range(self, g: np.ndarray, scale: float = 1.0) -> bool:
        if self.null_basis.shape[1] == 0:
            return True
        off = np.linalg.norm(self.null_basis.T @ g)
        return off <= RANGE_RTOL * max(1.0, scale, float(np.linalg.norm(g)))

    def pinv_quadratic(self, g: np.ndarray) -> float:
        """``<g, P^+ g>`` restricted to the range component of ``g``."""
        if self.rank == 0:
            return 0.0
        c = self.range_basis.T @ g
        return float(np.sum(c * c / self.eigvals))

    def conjugate_quadratic(self, g: np.ndarray, scale: float = 1.0) -> float:
        """``sup_y <g, y> - <y, P y>``: ``<g, P^+ g> / 4`` on ran P, else +inf."""
        if not self.in_range(g, scale):
            return math.inf
        return 0.25 * self.pinv_quadratic(g)


def null_space(m: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the null space of ``m``."""
    _, s, vt = np.linalg.svd(m)
    top = s[0] if s.size else 0.0
    rank = int(np.sum(s > RANK_RTOL * top)) if top > 0 else 0
    return vt[rank:].T.copy()


def row_space(m: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the row space of ``m``."""
    _, s, vt = np.linalg.svd(m)
    top = s[0] if s.size else 0.0
    rank = int(np.sum(s > RANK_RTOL * top)) if top > 0 else 0
    return vt[:rank].T.copy()
