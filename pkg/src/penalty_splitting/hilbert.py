"""Dense finite-dimensional Hilbert space primitives.

Vectors are one-dimensional ``float64`` numpy arrays; linear maps wrap a dense
matrix together with its transpose, which is the adjoint for the Euclidean
inner product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError

__all__ = [
    "LinearMap",
    "as_vector",
    "as_matrix",
    "inner",
    "norm",
    "apply",
    "apply_adjoint",
    "operator_norm",
]

# exact SVD below this size, power iteration above
SVD_MAX_DIM = 64
POWER_MAX_ITER = 500
POWER_TOL = 1e-12


def as_vector(x, dim=None, name="x") -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float array, optionally of a fixed length."""
    arr = np.array(x, dtype=float, copy=True)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size == 0:
        raise UsageError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise UsageError(f"{name} has dimension {arr.size}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} has non-finite entries")
    return arr


def as_matrix(a, name="matrix") -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.size == 0:
        raise UsageError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} has non-finite entries")
    return arr


def _check_same_dim(x, y):
    if x.shape != y.shape:
        raise UsageError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")


def inner(x, y) -> float:
    """Euclidean inner product ``sum(x_i * y_i)``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    _check_same_dim(x, y)
    return float(x @ y)


def norm(x) -> float:
    # hypot rescales internally, so tiny or huge entries do not under/overflow
    return math.hypot(*np.asarray(x, dtype=float).reshape(-1).tolist())


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Linear map ``K: R^d_in -> R^d_out`` backed by a dense matrix.

    The adjoint is the cached transpose, so ``<K* y, x> = <y, K x>``.
    """

    matrix: np.ndarray
    adjoint_matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = as_matrix(self.matrix, "K")
        m.setflags(write=False)
        t = np.ascontiguousarray(m.T)
        t.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "adjoint_matrix", t)

    @classmethod
    def identity(cls, dim: int) -> "LinearMap":
        return cls(np.eye(dim))

    @classmethod
    def zeros(cls, d_out: int, d_in: int) -> "LinearMap":
        return cls(np.zeros((d_out, d_in)))

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def dim_in(self) -> int:
        return self.matrix.shape[1]

    @property
    def dim_out(self) -> int:
        return self.matrix.shape[0]

    @property
    def adjoint(self) -> "LinearMap":
        return LinearMap(self.adjoint_matrix)

    def __call__(self, x):
        return self.apply(x)

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim_in,):
            raise UsageError(f"K expects a vector of dimension {self.dim_in}, got shape {x.shape}")
        return self.matrix @ x

    def apply_adjoint(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.dim_out,):
            raise UsageError(f"K* expects a vector of dimension {self.dim_out}, got shape {y.shape}")
        return self.adjoint_matrix @ y

    def norm(self) -> float:
        return operator_norm(self)


def apply(K: LinearMap, x) -> np.ndarray:
    return K.apply(x)


def apply_adjoint(K: LinearMap, y) -> np.ndarray:
    return K.apply_adjoint(y)


def _power_iteration(m: np.ndarray) -> float:
    """Largest singular value of ``m`` by power iteration on ``m^T m``."""
    n = m.shape[1]
    x = np.ones(n) / np.sqrt(n)
    if np.linalg.norm(m @ x) == 0.0:
        # all-ones lies in the null space; nudge it out
        x[0] += 1e-3
        x /= np.linalg.norm(x)
    prev = None
    rayleigh = 0.0
    for _ in range(POWER_MAX_ITER):
        y = m.T @ (m @ x)
        rayleigh = float(x @ y)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        x = y / ny
        if prev is not None and abs(rayleigh - prev) < POWER_TOL * max(1.0, abs(rayleigh)):
            break
        prev = rayleigh
    return float(np.sqrt(max(rayleigh, 0.0)))


def operator_norm(K) -> float:
    """Spectral norm ``sup{||Kx|| : ||x|| <= 1}``.

    Uses an exact SVD when both dimensions are at most 64 and deterministic
    power iteration otherwise. The zero map returns 0.
    """
    m = K.matrix if isinstance(K, LinearMap) else as_matrix(K, "K")
    if not np.any(m):
        return 0.0
    if max(m.shape) <= SVD_MAX_DIM:
        return float(np.linalg.svd(m, compute_uv=False)[0])
    return _power_iteration(m)
