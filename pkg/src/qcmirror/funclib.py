"""Concrete objectives with exact values and exact Clarke subdifferentials."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidInputError
from .geometry import Box, FeasibleSet, as_vector
from .oracles import ObjectiveOracle, SubgradientSet

KINK_TOL = 1e-14
MAX_KINK_INDEX = 52


@dataclass(frozen=True)
class Example1Function:
    """Convex piecewise-linear function on [0, 1] with kinks at ``1 - 2**-n``.

    Slope ``k`` on ``[0, 1/2]`` and ``k + sum_{i<=n} delta / 2**i`` on
    ``(q_n, q_{n+1}]``; the subdifferential jump at ``q_n`` is ``delta / 2**n``
    so the jumps sum to ``delta``.
    """

    k: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        if not (self.k > 0 and self.delta > 0):
            raise InvalidInputError("Example1Function needs k > 0 and delta > 0")

    @staticmethod
    def kink(n: int) -> float:
        return 1.0 - 0.5**n

    def _check(self, x: float) -> float:
        x = float(x)
        if not 0.0 <= x <= 1.0:
            raise DomainError(f"x = {x} is outside [0, 1]")
        return x

    def _branch(self, x: float) -> tuple[int, float, float]:
        """Branch index n with ``q_n < x <= q_{n+1}`` plus slope and intercept."""
        n, slope, offset = 0, self.k, 0.0
        q_next, jump = 0.5, self.delta
        while x > q_next:
            n += 1
            jump *= 0.5
            slope += jump
            offset += jump * (1.0 - 0.5**n)
            q_next = self.kink(n + 1)
            if q_next == 1.0:
                break
        return n, slope, offset

    def value(self, x: float) -> float:
        x = self._check(x)
        if x == 1.0:
            return self.k + self.delta / 3.0
        _, slope, offset = self._branch(x)
        return slope * x - offset

    def values(self, xs) -> np.ndarray:
        """Vectorised :meth:`value` using the same term-by-term partial sums."""
        xs = np.asarray(xs, dtype=float)
        if np.any((xs < 0) | (xs > 1)):
            raise DomainError("points outside [0, 1]")
        slopes, offsets, knots = self._tables()
        # branch n satisfies knots[n] < x <= knots[n + 1]
        n = np.searchsorted(knots, xs, side="left") - 1
        n = np.clip(n, 0, len(slopes) - 1)
        out = slopes[n] * xs - offsets[n]
        out[xs == 1.0] = self.limit_value()
        return out

    def _tables(self):
        slopes, offsets, knots = [self.k], [0.0], [-np.inf, 0.5]
        jump, off = self.delta, 0.0
        for n in range(1, MAX_KINK_INDEX + 1):
            jump *= 0.5
            off += jump * (1.0 - 0.5**n)
            slopes.append(slopes[-1] + jump)
            offsets.append(off)
            knots.append(self.kink(n + 1))
        return np.array(slopes), np.array(offsets), np.array(knots)

    def kink_index(self, x: float) -> int | None:
        """``n`` if ``x`` equals ``q_n`` within ``KINK_TOL`` (n <= 52), else None."""
        x = float(x)
        if not 0.0 < x < 1.0:
            return None
        n = int(round(-np.log2(1.0 - x)))
        if 1 <= n <= MAX_KINK_INDEX and abs(x - self.kink(n)) <= KINK_TOL:
            return n
        return None

    def slope_partial(self, n: int) -> float:
        """``k + sum_{i=1..n} delta / 2**i`` accumulated term by term."""
        s, jump = self.k, self.delta
        for _ in range(n):
            jump *= 0.5
            s += jump
        return s

    def subdifferential(self, x: float) -> SubgradientSet:
        x = self._check(x)
        n = self.kink_index(x)
        if n is not None:
            return SubgradientSet.interval(self.slope_partial(n - 1), self.slope_partial(n))
        if x == 1.0:
            return SubgradientSet.singleton([self.k + self.delta])
        _, slope, _ = self._branch(x)
        return SubgradientSet.singleton([slope])

    def limit_value(self) -> float:
        return self.k + self.delta / 3.0


class Example1Lifted(ObjectiveOracle):
    """``F(x) = f(<u, x - origin>)`` for an Example 1 function ``f``.

    With the defaults this is the 1-D function itself acting on length-1
    vectors. The Clarke subdifferential is ``u * df``.
    """

    def __init__(self, func: Example1Function, direction=None, origin=None):
        self.func = func
        self.direction = np.array([1.0]) if direction is None else as_vector(direction, "direction")
        self.origin = np.zeros_like(self.direction) if origin is None else as_vector(origin, "origin")
        if self.origin.shape != self.direction.shape:
            raise InvalidInputError("origin and direction dimensions differ")
        self.dim = self.direction.shape[0]
        self.lipschitz_grad = 0.0
        self.delta = func.delta * float(np.linalg.norm(self.direction))

    def param(self, x) -> float:
        x = as_vector(x)
        if x.shape[0] != self.dim:
            raise InvalidInputError("dimension mismatch")
        t = float(self.direction @ (x - self.origin))
        # absorb rounding at the domain ends
        if -1e-15 < t < 0.0:
            t = 0.0
        elif 1.0 < t < 1.0 + 1e-15:
            t = 1.0
        return t

    def value(self, x) -> float:
        return self.func.value(self.param(x))

    def values(self, points) -> np.ndarray:
        t = (np.atleast_2d(points) - self.origin) @ self.direction
        t = np.where((t < 0) & (t > -1e-15), 0.0, t)
        t = np.where((t > 1) & (t < 1 + 1e-15), 1.0, t)
        return self.func.values(t)

    def subdifferential(self, x) -> SubgradientSet:
        s = self.func.subdifferential(self.param(x))
        return SubgradientSet.hull(s.vertices[:, :1] * self.direction[None, :])

    def domain(self) -> FeasibleSet:
        if self.dim == 1 and self.direction[0] == 1.0:
            return Box(self.origin, self.origin + 1.0)
        raise InvalidInputError("domain box only defined for the native 1-D lift")

    @property
    def lipschitz(self) -> float:
        return (self.func.k + self.func.delta) * float(np.linalg.norm(self.direction))


@dataclass(frozen=True)
class QuadraticPiece:
    """``0.5 <A x, x> - <b, x> + alpha`` with ``A`` symmetric PSD."""

    A: np.ndarray
    b: np.ndarray
    alpha: float = 0.0

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = as_vector(self.b, "b")
        if a.shape != (b.size, b.size):
            raise InvalidInputError(f"A has shape {a.shape}, expected {(b.size, b.size)}")
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("A has non-finite entries")
        if not np.allclose(a, a.T, rtol=0, atol=1e-12):
            raise InvalidInputError("A is not symmetric")
        eig_min = float(np.linalg.eigvalsh(a).min())
        if eig_min < -1e-10:
            raise InvalidInputError(f"A is not positive semidefinite (min eigenvalue {eig_min:.3g})")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def dim(self) -> int:
        return self.b.size

    def value(self, x: np.ndarray) -> float:
        return 0.5 * float(x @ self.A @ x) - float(self.b @ x) + self.alpha

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x - self.b

    @property
    def lambda_max(self) -> float:
        return float(np.linalg.eigvalsh(self.A).max())


class MaxQuadObjective(ObjectiveOracle):
    """Pointwise maximum of convex quadratic pieces.

    The subdifferential is the hull of gradients of pieces within
    ``activity_tol * (1 + |f(x)|)`` of the maximum. ``lipschitz_grad``
    defaults to the largest piece eigenvalue; ``delta`` to ``jump_budget``
    over ``bounds`` when given, else 0 (one piece) or must be passed.
    """

    def __init__(self, pieces: Sequence[QuadraticPiece], activity_tol: float = 1e-9,
                 lipschitz_grad: float | None = None, delta: float | None = None,
                 bounds: FeasibleSet | None = None):
        if not pieces:
            raise InvalidInputError("max-of-quadratics needs at least one piece")
        dims = {p.dim for p in pieces}
        if len(dims) != 1:
            raise InvalidInputError(f"pieces have inconsistent dimensions {sorted(dims)}")
        self.pieces = list(pieces)
        self.dim = dims.pop()
        self.activity_tol = activity_tol
        self.lipschitz_grad = (max(p.lambda_max for p in self.pieces)
                               if lipschitz_grad is None else float(lipschitz_grad))
        if delta is None:
            delta = 0.0 if len(self.pieces) == 1 else (jump_budget(self.pieces, bounds) if bounds else None)
            if delta is None:
                raise InvalidInputError("delta must be given (or bounds supplied) for more than one piece")
        self.delta = float(delta)

    def _check(self, x) -> np.ndarray:
        x = as_vector(x)
        if x.shape[0] != self.dim:
            raise InvalidInputError(f"dimension mismatch: expected {self.dim}, got {x.shape[0]}")
        return x

    def piece_values(self, x) -> np.ndarray:
        x = self._check(x)
        return np.array([p.value(x) for p in self.pieces])

    def value(self, x) -> float:
        return float(self.piece_values(x).max())

    def values(self, points) -> np.ndarray:
        X = np.atleast_2d(np.asarray(points, dtype=float))
        per_piece = [0.5 * np.einsum("ij,ij->i", X @ p.A, X) - X @ p.b + p.alpha for p in self.pieces]
        return np.max(per_piece, axis=0)

    def eval_subdiff(self, x) -> tuple[float, SubgradientSet]:
        x = self._check(x)
        vals = self.piece_values(x)
        top = float(vals.max())
        active = vals >= top - self.activity_tol * (1.0 + abs(top))
        grads = [p.gradient(x) for p, a in zip(self.pieces, active) if a]
        return top, SubgradientSet.hull(grads)

    def subdifferential(self, x) -> SubgradientSet:
        return self.eval_subdiff(x)[1]


def maxquad_eval_subdiff(f: MaxQuadObjective, x) -> tuple[float, SubgradientSet]:
    return f.eval_subdiff(x)


def quadratic(A, b=None, alpha: float = 0.0) -> MaxQuadObjective:
    a = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.zeros(a.shape[0]) if b is None else b
    return MaxQuadObjective([QuadraticPiece(a, b, alpha)])


def half_squared_norm(dim: int) -> MaxQuadObjective:
    return quadratic(np.eye(dim))


def abs_first_coordinate(dim: int = 2) -> MaxQuadObjective:
    """``|x_1|`` as the max of two linear pieces; jump 2 at the kink."""
    e = np.zeros(dim)
    e[0] = 1.0
    z = np.zeros((dim, dim))
    return MaxQuadObjective([QuadraticPiece(z, -e), QuadraticPiece(z, e)], delta=2.0)


def jump_budget(pieces: Sequence[QuadraticPiece], bounds: FeasibleSet) -> float:
    """Upper bound on the sum of subdifferential jumps along any segment in ``bounds``.

    Two quadratic pieces cross at most twice on a segment, so there are at most
    ``m (m - 1)`` switches; each jump is bounded by the largest Euclidean
    gradient difference over the bounding box (affine in x, so the max sits at
    a vertex).
    """
    m = len(pieces)
    if m == 1:
        return 0.0
    lo, hi = bounds.bounding_box()
    corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(lo.size, -1).T
    worst = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            da = pieces[i].A - pieces[j].A
            db = pieces[i].b - pieces[j].b
            worst = max(worst, max(float(np.linalg.norm(da @ c - db)) for c in corners))
    return m * (m - 1) * worst
