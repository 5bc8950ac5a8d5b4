"""Independent reference computations used to audit the solver.

Nothing here calls the solver or the closed-form mirror step. Minimisers are
found by lattice search over the feasible set (refined by zooming), and the
mirror-step reference adds a general-purpose constrained local solve started
from the lattice minimiser.
"""

from __future__ import annotations

import itertools
import warnings
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import UnsupportedError
from .geometry import Box, EuclideanBall, FeasibleSet, Simplex, as_vector
from .oracles import ConstraintOracle, ObjectiveOracle
from .prox import ProxSetup


def lattice(feasible_set: FeasibleSet, per_dim: int, lower=None, upper=None) -> np.ndarray:
    """Points of a uniform lattice over a box, filtered to ``feasible_set``.

    The simplex is handled in barycentric coordinates so that lattice points
    lie exactly on it.
    """
    n = feasible_set.dim
    if n > 3:
        raise UnsupportedError("lattice search is limited to dimension <= 3")
    if isinstance(feasible_set, Simplex):
        if n == 1:
            return np.ones((1, 1))
        k = per_dim - 1
        pts = [c for c in itertools.product(range(k + 1), repeat=n - 1) if sum(c) <= k]
        free = np.array(pts, dtype=float) / k
        pts = np.hstack([free, 1.0 - free.sum(axis=1, keepdims=True)])
        pts[:, -1] = np.maximum(pts[:, -1], 0.0)
        if lower is not None:
            keep = np.all((pts >= lower - 1e-15) & (pts <= upper + 1e-15), axis=1)
            pts = pts[keep]
        return pts
    lo, hi = feasible_set.bounding_box()
    if lower is not None:
        lo, hi = np.maximum(lo, lower), np.minimum(hi, upper)
    axes = [np.linspace(a, b, per_dim) for a, b in zip(lo, hi)]
    pts = np.array(np.meshgrid(*axes, indexing="ij")).reshape(n, -1).T
    if isinstance(feasible_set, EuclideanBall):
        keep = np.linalg.norm(pts - feasible_set.center, axis=1) <= feasible_set.radius
        pts = pts[keep]
    return pts


def _feasible_mask(pts: np.ndarray, constraints: Sequence[ConstraintOracle]) -> np.ndarray:
    mask = np.ones(len(pts), dtype=bool)
    for g in constraints:
        mask &= np.array([g.value(p) <= 0.0 for p in pts])
    return mask


def grid_minimize(f: ObjectiveOracle | Callable, feasible_set: FeasibleSet,
                  constraints: Sequence[ConstraintOracle] = (), per_dim: int | None = None,
                  levels: int = 6, window: float = 10.0) -> np.ndarray:
    """Minimise ``f`` over ``feasible_set`` intersected with ``{g_m <= 0}`` by lattice zooming.

    Each level re-grids a window of ``window`` previous spacings around the
    incumbent, so the final spacing is about ``(2 window / per_dim)^levels``
    times the set diameter.
    """
    n = feasible_set.dim
    per_dim = per_dim or {1: 4001, 2: 201, 3: 41}[min(n, 3)]
    values = f.values if hasattr(f, "values") else (lambda P: np.array([f(p) for p in P]))
    lo, hi = feasible_set.bounding_box()
    best = None
    for _ in range(levels):
        pts = lattice(feasible_set, per_dim, lo, hi)
        if constraints:
            pts = pts[_feasible_mask(pts, constraints)]
        if len(pts) == 0:
            break
        vals = values(pts)
        i = int(np.argmin(vals))
        if best is None or vals[i] <= values(best[None, :])[0]:
            best = pts[i]
        spacing = (hi - lo) / (per_dim - 1)
        lo, hi = best - window * spacing, best + window * spacing
    if best is None:
        raise ValueError("no feasible lattice point found")
    return best


def _divergence_rows(prox: ProxSetup, x: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """``V(x, u)`` for every row ``u`` from the textbook formulas (squared distance, KL)."""
    if prox.is_entropy:
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(pts > 0, pts * np.log(pts / x), 0.0)
        return terms.sum(axis=1)
    return 0.5 * np.sum((pts - x) ** 2, axis=1)


def mirror_step_bruteforce(prox: ProxSetup, x, p, h: float, per_dim: int | None = None) -> np.ndarray:
    """``argmin_{u in Q} <h p, u> + V(x, u)`` by lattice search then SLSQP polishing."""
    x, p = as_vector(x), as_vector(p)
    n = prox.dim
    hp = h * p

    def objective(u):
        return float(hp @ u) + float(_divergence_rows(prox, x, u[None, :])[0])

    pts = lattice(prox.feasible_set, per_dim or {1: 2001, 2: 201, 3: 41}[min(n, 3)])
    vals = pts @ hp + _divergence_rows(prox, x, pts)
    start = pts[int(np.argmin(vals))]
    if isinstance(prox.feasible_set, Simplex) and n == 1:
        return np.ones(1)

    def grad(u):
        if prox.is_entropy:
            return hp + np.log(np.maximum(u, 1e-300) / x)
        return hp + (u - x)

    fs = prox.feasible_set
    cons, bounds = [], None
    if isinstance(fs, Box):
        bounds = list(zip(fs.lower, fs.upper))
    elif isinstance(fs, EuclideanBall):
        cons.append({"type": "ineq",
                     "fun": lambda u: fs.radius**2 - float((u - fs.center) @ (u - fs.center)),
                     "jac": lambda u: -2.0 * (u - fs.center)})
    else:
        bounds = [(1e-300, 1.0)] * n
        cons.append({"type": "eq", "fun": lambda u: float(np.sum(u) - 1.0), "jac": lambda u: np.ones(n)})
        start = np.maximum(start, 1e-12)
        start = start / start.sum()
    with warnings.catch_warnings():
        # SLSQP clips trial points to the bounds and says so; that is harmless here
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(objective, start, jac=grad, method="SLSQP", bounds=bounds, constraints=cons,
                       options={"ftol": 1e-16, "maxiter": 500})
    u = res.x
    if isinstance(fs, Simplex):
        u = np.maximum(u, 0.0)
        u = u / u.sum()
    else:
        u = fs.project(u)
    return u if objective(u) <= objective(start) else start
