"""Vectors, primal/dual norm pairs and feasible sets.

Points are plain 1-D float64 numpy arrays; :func:`as_vector` is the single
validation gate. Feasible sets are frozen dataclasses with ``contains`` and a
Euclidean ``project``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

DEFAULT_MEMBERSHIP_TOL = 1e-9


class NormKind(str, enum.Enum):
    EUCLIDEAN = "l2"
    L1 = "l1"
    LINF = "linf"

    @property
    def dual(self) -> "NormKind":
        return _DUAL[self]


_DUAL = {
    NormKind.EUCLIDEAN: NormKind.EUCLIDEAN,
    NormKind.L1: NormKind.LINF,
    NormKind.LINF: NormKind.L1,
}


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Return ``v`` as a finite 1-D float array (copy-free when possible)."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError(f"{name} has dimension 0")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite coordinates")
    return arr


def norm(v, kind: NormKind = NormKind.EUCLIDEAN) -> float:
    v = as_vector(v)
    kind = NormKind(kind)
    if kind is NormKind.EUCLIDEAN:
        return float(np.linalg.norm(v))
    if kind is NormKind.L1:
        return float(np.sum(np.abs(v)))
    return float(np.max(np.abs(v)))


def dual_norm(v, kind: NormKind = NormKind.EUCLIDEAN) -> float:
    """Norm of ``v`` as a linear functional when the primal norm is ``kind``."""
    return norm(v, NormKind(kind).dual)


def norm_ratio(kind_to: NormKind, kind_from: NormKind, dim: int) -> float:
    """Smallest c with ``norm(z, kind_to) <= c * norm(z, kind_from)`` in R^dim."""
    order = {NormKind.L1: 1.0, NormKind.EUCLIDEAN: 2.0, NormKind.LINF: math.inf}
    p, q = order[NormKind(kind_from)], order[NormKind(kind_to)]
    if q >= p:
        return 1.0
    # ||z||_q <= n^(1/q - 1/p) ||z||_p for q < p
    inv = lambda s: 0.0 if math.isinf(s) else 1.0 / s
    return float(dim ** (inv(q) - inv(p)))


def _check_dim(x: np.ndarray, dim: int) -> None:
    if x.shape[0] != dim:
        raise InvalidInputError(f"dimension mismatch: point has {x.shape[0]} coordinates, set has {dim}")


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray
    tol: float = DEFAULT_MEMBERSHIP_TOL

    def __post_init__(self):
        lo = as_vector(self.lower, "lower")
        hi = as_vector(self.upper, "upper")
        if lo.shape != hi.shape:
            raise InvalidInputError("box bounds have different dimensions")
        if np.any(lo > hi):
            raise InvalidInputError("box requires lower <= upper in every coordinate")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def contains(self, x) -> bool:
        x = as_vector(x)
        _check_dim(x, self.dim)
        return bool(np.all(x >= self.lower - self.tol) and np.all(x <= self.upper + self.tol))

    def project(self, x) -> np.ndarray:
        x = as_vector(x)
        _check_dim(x, self.dim)
        return np.clip(x, self.lower, self.upper)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lower.copy(), self.upper.copy()


@dataclass(frozen=True)
class EuclideanBall:
    center: np.ndarray
    radius: float
    tol: float = DEFAULT_MEMBERSHIP_TOL

    def __post_init__(self):
        c = as_vector(self.center, "center")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise InvalidInputError("ball radius must be positive and finite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, x) -> bool:
        x = as_vector(x)
        _check_dim(x, self.dim)
        return bool(np.linalg.norm(x - self.center) <= self.radius + self.tol)

    def project(self, x) -> np.ndarray:
        x = as_vector(x)
        _check_dim(x, self.dim)
        r = x - self.center
        dist = np.linalg.norm(r)
        if dist <= self.radius:
            return x.copy()
        return self.center + r * (self.radius / dist)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.center - self.radius, self.center + self.radius


@dataclass(frozen=True)
class Simplex:
    """Probability simplex ``{x >= 0, sum(x) = 1}`` in R^dimension."""

    dimension: int
    tol: float = DEFAULT_MEMBERSHIP_TOL

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise InvalidInputError("simplex dimension must be a positive integer")
        object.__setattr__(self, "dimension", int(self.dimension))

    @property
    def dim(self) -> int:
        return self.dimension

    def contains(self, x) -> bool:
        x = as_vector(x)
        _check_dim(x, self.dim)
        return bool(np.all(x >= -self.tol) and abs(np.sum(x) - 1.0) <= self.tol)

    def project(self, x) -> np.ndarray:
        # sort-based Euclidean projection
        x = as_vector(x)
        _check_dim(x, self.dim)
        u = np.sort(x)[::-1]
        css = np.cumsum(u) - 1.0
        ind = np.arange(1, x.size + 1)
        rho = np.count_nonzero(u - css / ind > 0)
        theta = css[rho - 1] / rho
        return np.maximum(x - theta, 0.0)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return np.zeros(self.dim), np.ones(self.dim)


FeasibleSet = Box | EuclideanBall | Simplex


def project_membership(x, feasible_set: FeasibleSet) -> bool:
    return feasible_set.contains(x)
