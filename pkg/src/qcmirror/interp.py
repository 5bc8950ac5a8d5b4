"""Numerical checks of the nonsmooth quadratic-interpolation inequality.

* :func:`clarke_dd_estimate` - Clarke upper directional derivative from
  difference quotients over shrinking neighbourhoods.
* :func:`scan_segment` - locate kinks of ``t -> f((1-t)x + ty)`` and measure
  the subdifferential jump at each.
* :func:`check_interpolation` - ``|f(y) - f(x) - <g, y-x>| <= L/2 |y-x|^2 +
  delta |y-x|`` for the best ``g`` in the Clarke subdifferential at ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidInputError
from .geometry import NormKind, as_vector, dual_norm, norm
from .oracles import ObjectiveOracle

DEFAULT_RADII = (1e-4, 1e-5, 1e-6)


def clarke_dd_estimate(f: ObjectiveOracle, x, h, radii: Sequence[float] = DEFAULT_RADII,
                       n_random: int = 8, seed: int = 0) -> float:
    """Estimate ``limsup_{x' -> x, a -> 0} (f(x' + a h) - f(x')) / a``.

    For each radius ``r`` the quotient with ``a = r`` is maximised over base
    points ``x'`` in the ``r``-ball (centre, +-r along each axis and along
    ``h``, plus seeded random points). The last two maxima are combined by a
    Richardson step, which removes the O(r) bias of smooth pieces and is
    exact once ``r`` sits inside one linear piece.
    """
    if len(radii) == 0:
        raise InvalidInputError("radii must be nonempty")
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii) or any(b >= a for a, b in zip(radii, radii[1:])):
        raise InvalidInputError("radii must be positive and strictly decreasing")
    x, h = as_vector(x, "x"), as_vector(h, "h")
    n = x.size
    rng = np.random.default_rng(seed)
    hn = np.linalg.norm(h)
    dirs = [np.zeros(n)]
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        dirs += [e, -e]
    if hn > 0:
        dirs += [h / hn, -h / hn]
    for _ in range(n_random):
        u = rng.standard_normal(n)
        dirs.append(u / np.linalg.norm(u) * rng.uniform())

    maxima = []
    for r in radii:
        best = -math.inf
        for u in dirs:
            xp = x + r * u
            try:
                q = (f.value(xp + r * h) - f.value(xp)) / r
            except (DomainError, InvalidInputError):
                continue
            best = max(best, q)
        if not math.isfinite(best):
            raise DomainError("no admissible base point near x along h")
        maxima.append(best)
    if len(maxima) == 1:
        return maxima[0]
    r1, r2 = radii[-2], radii[-1]
    m1, m2 = maxima[-2], maxima[-1]
    return m2 + (m2 - m1) * r2 / (r1 - r2)


@dataclass
class SegmentScan:
    x: np.ndarray
    y: np.ndarray
    kink_params: list[float] = field(default_factory=list)
    jump_sizes: list[float] = field(default_factory=list)
    declared_L: float = 0.0
    declared_delta: float = 0.0

    @property
    def total_jump(self) -> float:
        return float(sum(self.jump_sizes))

    def within_budget(self, slack: float = 1e-9) -> bool:
        return self.total_jump <= self.declared_delta + slack


def scan_segment(f: ObjectiveOracle, x, y, grid: int = 2**16, jump_tol: float = 1e-7,
                 norm_kind: NormKind = NormKind.EUCLIDEAN, max_kinks: int = 52) -> SegmentScan:
    """Find parameters ``t`` where one-sided derivatives of ``phi(t) = f(y_t)`` differ.

    Detection uses short windows (at most 1e-8) so a kink is only flagged by
    the node or cell that actually holds it; cells whose derivative change
    exceeds the curvature allowance ``L |y-x|^2 w`` are bisected. Jumps at
    nodes are then re-measured with windows a quarter of the distance to the
    neighbouring nodes. Leaf cells localise their kink by intersecting the two
    one-sided tangent lines. Jump sizes are reported divided by ``|y - x|``.
    """
    if grid < 2:
        raise InvalidInputError("grid must be at least 2")
    x, y = as_vector(x, "x"), as_vector(y, "y")
    d = y - x
    seg = norm(d, norm_kind)
    if seg == 0:
        raise InvalidInputError("segment endpoints coincide")
    L = float(getattr(f, "lipschitz_grad", 0.0))
    curv = L * float(np.linalg.norm(d)) ** 2

    def phi(t: float) -> float:
        t = min(max(t, 0.0), 1.0)
        return f.value(y if t == 1.0 else x + t * d)

    def d_right(t, eta):
        return (phi(t + eta) - phi(t)) / eta

    def d_left(t, eta):
        return (phi(t) - phi(t - eta)) / eta

    def phi_batch(t: np.ndarray) -> np.ndarray:
        t = np.clip(t, 0.0, 1.0)
        pts = x[None, :] + t[:, None] * d[None, :]
        pts[t == 1.0] = y
        return f.values(pts)

    ts = np.linspace(0.0, 1.0, grid + 1)
    w = 1.0 / grid
    eta0 = min(1e-8, w / 4)
    vals = phi_batch(ts)
    dr = (phi_batch(ts[:-1] + eta0) - vals[:-1]) / eta0
    dl = (vals[1:] - phi_batch(ts[1:] - eta0)) / eta0
    scale_slope = max(1.0, float(np.max(np.abs(dr))), float(np.max(np.abs(dl))))
    scale_val = max(1.0, float(np.max(np.abs(vals))))
    tol = jump_tol * scale_slope
    # below this width the derivative quotients drown in rounding
    min_width = max(1e-12, 64 * np.finfo(float).eps * scale_val / tol)

    kinks: list[tuple[float, float]] = []

    def node(t: float, spacing: float) -> None:
        e = min(1e-8, spacing / 4)
        if abs(d_right(t, e) - d_left(t, e)) > tol + curv * 2 * e:
            big = spacing / 4
            kinks.append((t, abs(d_right(t, big) - d_left(t, big))))

    def cell(a: float, b: float, ra: float, lb: float) -> None:
        width = b - a
        change = abs(lb - ra)
        if change <= tol + curv * width or len(kinks) >= max_kinks:
            return
        if width <= min_width:
            e = width / 4
            sa, sb = d_right(a, e), d_left(b, e)
            t_star = a
            if sb != sa:
                t_star = (phi(b) - phi(a) + sa * a - sb * b) / (sa - sb)
            kinks.append((min(max(t_star, a), b), abs(sb - sa)))
            return
        m = 0.5 * (a + b)
        node(m, width / 2)
        e = min(1e-8, width / 8)
        cell(a, m, d_right(a, e), d_left(m, e))
        cell(m, b, d_right(m, e), d_left(b, e))

    for i in range(1, grid):
        if abs(dr[i] - dl[i - 1]) > tol + curv * 2 * eta0:
            node(ts[i], w)
    for i in range(grid):
        cell(ts[i], ts[i + 1], dr[i], dl[i])

    kinks.sort()
    kinks = kinks[:max_kinks]
    return SegmentScan(
        x=x, y=y,
        kink_params=[t for t, _ in kinks],
        jump_sizes=[j / seg for _, j in kinks],
        declared_L=L,
        declared_delta=float(getattr(f, "delta", 0.0)),
    )


@dataclass
class InterpolationReport:
    residual: float
    chosen_subgradient: np.ndarray
    holds: bool
    lhs: float = 0.0
    rhs: float = 0.0

    def to_record(self) -> dict:
        return {
            "residual": self.residual,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "holds": self.holds,
            "chosen_subgradient": [float(v) for v in self.chosen_subgradient],
        }


def interpolation_lhs(f: ObjectiveOracle, x, y) -> tuple[float, np.ndarray]:
    """``min_g |f(y) - f(x) - <g, y - x>|`` over the subdifferential at ``x``.

    ``<g, y-x>`` sweeps the interval between its values at the two extreme
    vertices, so the minimum is the distance from ``f(y) - f(x)`` to that
    interval and the minimiser is a point on the segment joining them.
    """
    x, y = as_vector(x), as_vector(y)
    diff = y - x
    gap = f.value(y) - f.value(x)
    verts = f.subdifferential(x).vertices
    s = verts @ diff
    i_lo, i_hi = int(np.argmin(s)), int(np.argmax(s))
    s_lo, s_hi = float(s[i_lo]), float(s[i_hi])
    target = min(max(gap, s_lo), s_hi)
    lam = 0.0 if s_hi == s_lo else (target - s_lo) / (s_hi - s_lo)
    g = (1 - lam) * verts[i_lo] + lam * verts[i_hi]
    return abs(gap - target), g


def check_interpolation(f: ObjectiveOracle, x, y, L: float, delta: float,
                        norm_kind: NormKind = NormKind.EUCLIDEAN, rtol: float = 1e-8) -> InterpolationReport:
    x, y = as_vector(x), as_vector(y)
    lhs, g = interpolation_lhs(f, x, y)
    r = norm(y - x, norm_kind)
    rhs = 0.5 * L * r**2 + delta * r
    residual = lhs - rhs
    scale = max(1.0, abs(f.value(x)), abs(f.value(y)))
    return InterpolationReport(residual=residual, chosen_subgradient=g,
                               holds=residual <= rtol * scale, lhs=lhs, rhs=rhs)


def corollary_upper_bound(f: ObjectiveOracle, x, y, L: float, delta: float,
                          norm_kind: NormKind = NormKind.EUCLIDEAN) -> float:
    """``f(x) + (max ||g||_* + delta) |y - x| + L/2 |y - x|^2``."""
    x, y = as_vector(x), as_vector(y)
    r = norm(y - x, norm_kind)
    gmax = max(dual_norm(v, norm_kind) for v in f.subdifferential(x).vertices)
    return f.value(x) + (gmax + delta) * r + 0.5 * L * r**2


def smooth_bound_residuals(f: ObjectiveOracle, x, y, L: float) -> tuple[float, float]:
    """Residuals of ``phi_lower <= f(y) <= phi_upper`` for a smooth ``f``.

    ``phi_upper/lower = f(x) + <grad f(x), y-x> +- L/2 |y-x|^2``. Both returned
    values are ``<= 0`` when the bounds hold.
    """
    x, y = as_vector(x), as_vector(y)
    sset = f.subdifferential(x)
    if not sset.is_singleton():
        raise InvalidInputError("smooth bounds need a differentiable point")
    lin = f.value(x) + float(sset.vertices[0] @ (y - x))
    q = 0.5 * L * float(np.linalg.norm(y - x)) ** 2
    fy = f.value(y)
    return fy - (lin + q), (lin - q) - fy


def sample_segments(rng: np.random.Generator, lower, upper, count: int,
                    toward_upper: bool = False) -> list[tuple[np.ndarray, np.ndarray]]:
    """Random endpoint pairs in a box; ``toward_upper`` orders 1-D pairs so ``x < y``."""
    lower, upper = as_vector(lower), as_vector(upper)
    pairs = []
    for _ in range(count):
        a = rng.uniform(lower, upper)
        b = rng.uniform(lower, upper)
        if toward_upper and lower.size == 1 and a[0] > b[0]:
            a, b = b, a
        pairs.append((a, b))
    return pairs
