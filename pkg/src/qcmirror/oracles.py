"""Objective and constraint oracles.

An objective reports its value and its whole Clarke subdifferential as a
:class:`SubgradientSet`; constraints are convex and report one subgradient and
a Lipschitz constant.
"""

from __future__ import annotations

import abc
import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog, nnls

from .errors import InvalidInputError
from .geometry import NormKind, as_vector, dual_norm, norm, norm_ratio


class SubgradientSet:
    """Polyhedral Clarke subdifferential: convex hull of finitely many vertices.

    ``kind`` is one of ``"singleton"``, ``"interval"`` (1-D, vertices lo and
    hi) or ``"hull"``.
    """

    __slots__ = ("kind", "vertices")

    def __init__(self, kind: str, vertices):
        verts = np.atleast_2d(np.asarray(vertices, dtype=float))
        if verts.shape[0] == 0:
            raise InvalidInputError("subgradient set must be nonempty")
        if not np.all(np.isfinite(verts)):
            raise InvalidInputError("subgradient set has non-finite entries")
        if kind not in ("singleton", "interval", "hull"):
            raise InvalidInputError(f"unknown subgradient set kind {kind!r}")
        self.kind = kind
        self.vertices = verts

    @classmethod
    def singleton(cls, v) -> "SubgradientSet":
        return cls("singleton", as_vector(v)[None, :])

    @classmethod
    def interval(cls, lo: float, hi: float) -> "SubgradientSet":
        if lo > hi:
            raise InvalidInputError(f"interval requires lo <= hi, got [{lo}, {hi}]")
        if lo == hi:
            return cls.singleton([lo])
        return cls("interval", [[lo], [hi]])

    @classmethod
    def hull(cls, vertices) -> "SubgradientSet":
        verts = np.unique(np.atleast_2d(np.asarray(vertices, dtype=float)), axis=0)
        if verts.shape[0] == 1:
            return cls.singleton(verts[0])
        return cls("hull", verts)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def lo(self) -> float:
        return float(self.vertices[:, 0].min())

    @property
    def hi(self) -> float:
        return float(self.vertices[:, 0].max())

    def extreme_points(self) -> np.ndarray:
        return self.vertices.copy()

    def is_singleton(self) -> bool:
        return self.vertices.shape[0] == 1

    def diameter(self, kind: NormKind = NormKind.EUCLIDEAN) -> float:
        """Max pairwise dual-norm distance; attained at a vertex pair by convexity."""
        v = self.vertices
        if v.shape[0] == 1:
            return 0.0
        return max(dual_norm(a - b, kind) for a, b in itertools.combinations(v, 2))

    def support(self, h) -> float:
        """``max <v, h>`` over the set."""
        return float(np.max(self.vertices @ as_vector(h)))

    def contains(self, v, tol: float = 1e-9) -> bool:
        v = as_vector(v)
        if v.shape[0] != self.dim:
            return False
        verts = self.vertices
        if verts.shape[0] == 1:
            return bool(np.max(np.abs(v - verts[0])) <= tol)
        if self.dim == 1:
            return self.lo - tol <= v[0] <= self.hi + tol
        # feasibility of v = V^T w, w in the probability simplex
        k = verts.shape[0]
        res = linprog(
            np.zeros(k),
            A_eq=np.vstack([verts.T, np.ones((1, k))]),
            b_eq=np.concatenate([v, [1.0]]),
            bounds=[(0, None)] * k,
            method="highs",
        )
        if res.status == 0:
            return True
        # near-boundary points: accept if the hull projection is within tol
        w = _min_norm_weights(verts - v)
        return bool(np.linalg.norm(verts.T @ w - v) <= tol)

    def __repr__(self):
        if self.kind == "interval":
            return f"SubgradientSet.interval({self.lo}, {self.hi})"
        return f"SubgradientSet.{self.kind}({self.vertices.tolist()})"


def _min_norm_weights(verts: np.ndarray) -> np.ndarray:
    """Convex weights of the min-Euclidean-norm point of conv(verts)."""
    k = verts.shape[0]
    rho = 1e3 * max(1.0, float(np.abs(verts).max()))
    a = np.vstack([verts.T, rho * np.ones((1, k))])
    b = np.concatenate([np.zeros(verts.shape[1]), [rho]])
    w, _ = nnls(a, b)
    return w / w.sum()


def min_dual_norm_element(sset: SubgradientSet, kind: NormKind = NormKind.EUCLIDEAN) -> np.ndarray:
    verts = sset.vertices
    if verts.shape[0] == 1:
        return verts[0].copy()
    if sset.dim == 1:
        return np.array([min(max(0.0, sset.lo), sset.hi)])
    dual = NormKind(kind).dual
    if dual is NormKind.EUCLIDEAN:
        return verts.T @ _min_norm_weights(verts)
    # l1 / linf minimisation over the hull as a linear program
    k, n = verts.shape
    if dual is NormKind.LINF:
        # vars: w (k), s (1); minimise s with -s <= V^T w <= s
        c = np.concatenate([np.zeros(k), [1.0]])
        a_ub = np.block([[verts.T, -np.ones((n, 1))], [-verts.T, -np.ones((n, 1))]])
        b_ub = np.zeros(2 * n)
    else:
        # vars: w (k), s (n); minimise sum s with -s <= V^T w <= s
        c = np.concatenate([np.zeros(k), np.ones(n)])
        a_ub = np.block([[verts.T, -np.eye(n)], [-verts.T, -np.eye(n)]])
        b_ub = np.zeros(2 * n)
    a_eq = np.concatenate([np.ones(k), np.zeros(c.size - k)])[None, :]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                  bounds=[(0, None)] * k + [(None, None)] * (c.size - k), method="highs")
    w = np.clip(res.x[:k], 0.0, None)
    return verts.T @ (w / w.sum())


@dataclass(frozen=True)
class MinDualNorm:
    norm: NormKind = NormKind.EUCLIDEAN


@dataclass(frozen=True)
class ExtremePoint:
    index: int


@dataclass(frozen=True)
class BestForInterpolation:
    """Pick the element minimising ``residual(g)``.

    ``residual`` is convex in ``g`` for the interpolation residual, so the
    search covers the vertices plus a uniform grid on every vertex pair.
    """

    residual: Callable[[np.ndarray], float]
    grid: int = 10


SelectionRule = MinDualNorm | ExtremePoint | BestForInterpolation


def subgradient_selection(sset: SubgradientSet, rule: SelectionRule = MinDualNorm()) -> np.ndarray:
    if sset.is_singleton():
        return sset.vertices[0].copy()
    if isinstance(rule, MinDualNorm):
        return min_dual_norm_element(sset, rule.norm)
    if isinstance(rule, ExtremePoint):
        return sset.vertices[rule.index].copy()
    if isinstance(rule, BestForInterpolation):
        return min(candidate_subgradients(sset, rule.grid), key=rule.residual)
    raise InvalidInputError(f"unknown selection rule {rule!r}")


def candidate_subgradients(sset: SubgradientSet, grid: int = 10) -> list[np.ndarray]:
    verts = sset.vertices
    out = [v.copy() for v in verts]
    ts = np.linspace(0.0, 1.0, grid)[1:-1]
    for a, b in itertools.combinations(verts, 2):
        out.extend((1 - t) * a + t * b for t in ts)
    return out


class ObjectiveOracle(abc.ABC):
    """Locally Lipschitz objective with a polyhedral Clarke subdifferential.

    ``lipschitz_grad`` and ``delta`` are the declared (L, delta) class
    parameters; verification code tests against them.
    """

    lipschitz_grad: float = 0.0
    delta: float = 0.0
    dim: int

    @abc.abstractmethod
    def value(self, x) -> float: ...

    @abc.abstractmethod
    def subdifferential(self, x) -> SubgradientSet: ...

    def values(self, points) -> np.ndarray:
        """Row-wise values of a ``(k, dim)`` array of points."""
        return np.array([self.value(p) for p in np.atleast_2d(points)])

    def is_kink(self, x) -> bool:
        return not self.subdifferential(x).is_singleton()

    def subgradient(self, x, kind: NormKind = NormKind.EUCLIDEAN) -> np.ndarray:
        return subgradient_selection(self.subdifferential(x), MinDualNorm(kind))

    def __call__(self, x) -> float:
        return self.value(x)


class ConstraintOracle(abc.ABC):
    """Convex constraint ``g(x) <= 0`` with Lipschitz constant ``lipschitz``."""

    lipschitz: float

    @abc.abstractmethod
    def value(self, x) -> float: ...

    @abc.abstractmethod
    def subgradient(self, x) -> np.ndarray: ...

    def __call__(self, x) -> float:
        return self.value(x)


class LinearConstraint(ConstraintOracle):
    """``g(x) = <a, x> - b``."""

    def __init__(self, a, b: float, norm_kind: NormKind = NormKind.EUCLIDEAN):
        self.a = as_vector(a, "a")
        self.b = float(b)
        self.norm_kind = NormKind(norm_kind)
        self.lipschitz = dual_norm(self.a, self.norm_kind)

    def value(self, x) -> float:
        return float(self.a @ as_vector(x) - self.b)

    def subgradient(self, x) -> np.ndarray:
        return self.a.copy()


class NormBallResidual(ConstraintOracle):
    """``g(x) = ||x - center||_q - radius``; Lipschitz w.r.t. the primal norm."""

    def __init__(self, center, radius: float, ball_norm: NormKind = NormKind.EUCLIDEAN,
                 norm_kind: NormKind = NormKind.EUCLIDEAN):
        self.center = as_vector(center, "center")
        self.radius = float(radius)
        self.ball_norm = NormKind(ball_norm)
        self.norm_kind = NormKind(norm_kind)
        self.lipschitz = norm_ratio(self.ball_norm, self.norm_kind, self.center.size)

    def value(self, x) -> float:
        return norm(as_vector(x) - self.center, self.ball_norm) - self.radius

    def subgradient(self, x) -> np.ndarray:
        z = as_vector(x) - self.center
        if self.ball_norm is NormKind.L1:
            return np.sign(z)
        if self.ball_norm is NormKind.EUCLIDEAN:
            nz = np.linalg.norm(z)
            return z / nz if nz > 0 else np.zeros_like(z)
        s = np.zeros_like(z)
        i = int(np.argmax(np.abs(z)))
        s[i] = np.sign(z[i])
        return s


def max_constraint(x, constraints: Sequence[ConstraintOracle],
                   threshold: float | None = None) -> tuple[float, int]:
    """Largest constraint value and an index.

    Without ``threshold`` the index is the first argmax. With it, the index is
    the smallest ``m`` whose value exceeds ``threshold`` (first argmax when
    nothing does).
    """
    if not constraints:
        raise InvalidInputError("constraint list is empty")
    values = [g.value(x) for g in constraints]
    best = max(values)
    index = values.index(best)
    if threshold is not None:
        for m, val in enumerate(values):
            if val > threshold:
                index = m
                break
    return best, index
