"""Reference problems with independently computed solutions.

``x_star`` always comes from :func:`bruteforce.grid_minimize`, never from the
solver. ``theta0`` is set honestly from it: ``theta0^2 >= d(x_star)`` with a
small margin for the lattice error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bruteforce import grid_minimize
from .funclib import MaxQuadObjective, QuadraticPiece, quadratic
from .oracles import LinearConstraint, NormBallResidual
from .geometry import NormKind
from .prox import ProxSetup
from .solver import Problem

BENCH_EPSILONS = (0.2, 0.1, 0.05, 0.02)
THETA_MARGIN = 1e-4


@dataclass
class Benchmark:
    name: str
    problem: Problem
    x_star: np.ndarray
    L: float
    delta: float


def _theta0(prox: ProxSetup, x_star) -> float:
    return math.sqrt(prox.d(x_star)) + THETA_MARGIN


def quadratic_1d_parts():
    """``f(x) = x^2`` on [-1, 1], ``g(x) = -x``, prox centred at -1."""
    f = quadratic([[2.0]])
    g = LinearConstraint([-1.0], 0.0)
    prox = ProxSetup.euclidean_box([-1.0], [1.0], center=[-1.0])
    return f, [g], prox


@lru_cache(maxsize=None)
def _x_star_1d() -> tuple:
    f, cons, prox = quadratic_1d_parts()
    return tuple(grid_minimize(f, prox.feasible_set, cons))


def quadratic_1d(epsilon: float) -> Benchmark:
    f, cons, prox = quadratic_1d_parts()
    x_star = np.array(_x_star_1d())
    problem = Problem(f, cons, prox, epsilon, _theta0(prox, x_star))
    return Benchmark("quadratic_1d", problem, x_star, f.lipschitz_grad, 0.0)


def _spd_piece(A, center, shift=0.0) -> QuadraticPiece:
    A = np.asarray(A, dtype=float)
    c = np.asarray(center, dtype=float)
    return QuadraticPiece(A, A @ c, 0.5 * float(c @ A @ c) + shift)


def maxquad_2d_parts():
    """Two shifted quadratics on the box [-2, 2]^2 with ``||x||_1 <= 1``."""
    prox = ProxSetup.euclidean_box([-2.0, -2.0], [2.0, 2.0])
    pieces = [
        _spd_piece([[2.0, 0.0], [0.0, 1.0]], [1.5, 1.0]),
        _spd_piece([[1.0, 0.3], [0.3, 1.5]], [0.5, 1.8], shift=0.3),
    ]
    f = MaxQuadObjective(pieces, bounds=prox.feasible_set)
    g = NormBallResidual([0.0, 0.0], 1.0, ball_norm=NormKind.L1)
    return f, [g], prox


@lru_cache(maxsize=None)
def _x_star_2d() -> tuple:
    f, cons, prox = maxquad_2d_parts()
    return tuple(grid_minimize(f, prox.feasible_set, cons))


def maxquad_2d(epsilon: float) -> Benchmark:
    f, cons, prox = maxquad_2d_parts()
    x_star = np.array(_x_star_2d())
    problem = Problem(f, cons, prox, epsilon, _theta0(prox, x_star))
    return Benchmark("maxquad_2d", problem, x_star, f.lipschitz_grad, f.delta)


BENCHMARKS = {"quadratic_1d": quadratic_1d, "maxquad_2d": maxquad_2d}
