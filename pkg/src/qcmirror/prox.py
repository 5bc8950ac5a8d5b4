"""Prox functions, Bregman divergences and the mirror step.

Three closed-form setups are provided:

* ``euclidean_box`` / ``euclidean_ball``: ``d(x) = 0.5 * ||x - c||_2^2``; the
  mirror step is the Euclidean projection of ``x - h p``.
* ``entropy_simplex``: ``d(x) = sum x_i log x_i + log n`` on the probability
  simplex, 1-strongly convex w.r.t. the l1 norm; the mirror step is the
  multiplicative-weights update.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInputError
from .geometry import Box, EuclideanBall, FeasibleSet, NormKind, Simplex, as_vector

ENTROPY_FLOOR = 1e-300


class ProxKind(str, enum.Enum):
    EUCLIDEAN_BOX = "euclidean_box"
    EUCLIDEAN_BALL = "euclidean_ball"
    ENTROPY_SIMPLEX = "entropy_simplex"


_SET_TYPE = {
    ProxKind.EUCLIDEAN_BOX: Box,
    ProxKind.EUCLIDEAN_BALL: EuclideanBall,
    ProxKind.ENTROPY_SIMPLEX: Simplex,
}


@dataclass(frozen=True)
class ProxSetup:
    kind: ProxKind
    feasible_set: FeasibleSet
    center: np.ndarray | None = None

    def __post_init__(self):
        kind = ProxKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not isinstance(self.feasible_set, _SET_TYPE[kind]):
            raise InvalidInputError(
                f"{kind.value} needs a {_SET_TYPE[kind].__name__}, got {type(self.feasible_set).__name__}")
        if kind is ProxKind.ENTROPY_SIMPLEX:
            if self.center is not None:
                raise InvalidInputError("entropy prox has no configurable center")
        else:
            c = np.zeros(self.dim) if self.center is None else as_vector(self.center, "center")
            if c.shape[0] != self.dim:
                raise InvalidInputError("prox center dimension does not match the set")
            object.__setattr__(self, "center", c)

    @classmethod
    def euclidean_box(cls, lower, upper, center=None) -> "ProxSetup":
        return cls(ProxKind.EUCLIDEAN_BOX, Box(lower, upper), center)

    @classmethod
    def euclidean_ball(cls, center, radius, prox_center=None) -> "ProxSetup":
        return cls(ProxKind.EUCLIDEAN_BALL, EuclideanBall(center, radius), prox_center)

    @classmethod
    def entropy_simplex(cls, dimension: int) -> "ProxSetup":
        return cls(ProxKind.ENTROPY_SIMPLEX, Simplex(dimension))

    @property
    def dim(self) -> int:
        return self.feasible_set.dim

    @property
    def norm(self) -> NormKind:
        return NormKind.L1 if self.kind is ProxKind.ENTROPY_SIMPLEX else NormKind.EUCLIDEAN

    @property
    def is_entropy(self) -> bool:
        return self.kind is ProxKind.ENTROPY_SIMPLEX

    def _interior(self, x) -> np.ndarray:
        x = as_vector(x)
        if np.any(x <= 0):
            raise DomainError("entropy prox needs strictly positive coordinates")
        return x

    def d(self, x) -> float:
        x = as_vector(x)
        if self.is_entropy:
            xs = np.maximum(x, ENTROPY_FLOOR)
            return float(np.sum(np.where(x > 0, x * np.log(xs), 0.0)) + math.log(self.dim))
        r = x - self.center
        return 0.5 * float(r @ r)

    def grad_d(self, x) -> np.ndarray:
        if self.is_entropy:
            return np.log(self._interior(x)) + 1.0
        return as_vector(x) - self.center

    def bregman(self, x, y) -> float:
        """``V(x, y) = d(y) - d(x) - <grad d(x), y - x>``."""
        x, y = as_vector(x), as_vector(y)
        if self.is_entropy:
            x = self._interior(x)
            ys = np.maximum(y, ENTROPY_FLOOR)
            kl = np.where(y > 0, y * np.log(ys / x), 0.0)
            return float(np.sum(kl) + np.sum(x) - np.sum(y))
        r = y - x
        return 0.5 * float(r @ r)

    def mirror_step(self, x, p, h: float) -> np.ndarray:
        """``argmin_{u in Q} <h p, u> + V(x, u)``."""
        if not h > 0:
            raise InvalidInputError(f"step size must be positive, got {h}")
        x, p = as_vector(x, "x"), as_vector(p, "p")
        if not self.feasible_set.contains(x):
            raise DomainError("mirror step base point is outside the feasible set")
        if self.is_entropy:
            logits = np.log(np.maximum(x, ENTROPY_FLOOR)) - h * p
            logits -= logits.max()
            w = np.exp(logits)
            z = np.maximum(w / w.sum(), ENTROPY_FLOOR)
            return z / z.sum()
        return self.feasible_set.project(x - h * p)

    def start_point(self) -> np.ndarray:
        """``argmin_{x in Q} d(x)``."""
        if self.is_entropy:
            return np.full(self.dim, 1.0 / self.dim)
        return self.feasible_set.project(self.center)


def strong_convexity_gap(setup: ProxSetup, x, y) -> float:
    """``<grad d(x) - grad d(y), x - y> - ||x - y||^2`` (non-negative for a valid prox)."""
    x, y = as_vector(x), as_vector(y)
    diff = x - y
    nrm = float(np.sum(np.abs(diff))) if setup.is_entropy else float(np.linalg.norm(diff))
    return float((setup.grad_d(x) - setup.grad_d(y)) @ diff) - nrm**2


def theta0_is_honest(setup: ProxSetup, x_star, theta0: float) -> bool:
    return setup.d(x_star) <= theta0**2
