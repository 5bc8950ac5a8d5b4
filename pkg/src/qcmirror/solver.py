"""Adaptive mirror descent with functional constraints.

Each iteration checks the constraints at the current point. If all are at
most ``epsilon`` the step is *productive*: move along the objective
subgradient with ``h = epsilon / ||grad f||_*``. Otherwise the step is
*non-productive*: move along the subgradient of the first violated
constraint with ``h = epsilon / ||grad g||_*^2``. The run stops once

    theta0^2 <= epsilon^2 / 2 * (|I| + sum_{k not in I} 1 / ||grad g_m(k)(x^k)||_*^2)

and returns the best productive iterate. The two step-size rules differ in
the power of the norm; both are implemented as stated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, OracleInconsistencyError
from .geometry import dual_norm
from .oracles import ConstraintOracle, MinDualNorm, ObjectiveOracle, max_constraint, subgradient_selection
from .prox import ProxSetup

DEFAULT_MAX_ITER_FACTOR = 10


class StepKind(str, enum.Enum):
    PRODUCTIVE = "productive"
    NONPRODUCTIVE = "nonproductive"


class StopReason(str, enum.Enum):
    CRITERION_MET = "criterion_met"
    ZERO_OBJECTIVE_SUBGRADIENT = "zero_objective_subgradient"
    SAFETY_CAP = "safety_cap"


@dataclass
class Problem:
    objective: ObjectiveOracle
    constraints: Sequence[ConstraintOracle]
    prox: ProxSetup
    epsilon: float
    theta0: float
    max_iterations: int | None = None
    max_iter_factor: float = DEFAULT_MAX_ITER_FACTOR

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise InvalidInputError("epsilon must be positive")
        if not (self.theta0 > 0 and math.isfinite(self.theta0)):
            raise InvalidInputError("theta0 must be positive")
        if self.objective.dim != self.prox.dim:
            raise InvalidInputError(
                f"objective dimension {self.objective.dim} does not match prox dimension {self.prox.dim}")
        self.constraints = list(self.constraints)

    @property
    def M_g(self) -> float:
        return max((g.lipschitz for g in self.constraints), default=0.0)

    def iteration_bound(self) -> int:
        return theoretical_iteration_bound(self.epsilon, self.theta0, self.M_g)

    def safety_cap(self) -> int:
        if self.max_iterations is not None:
            return int(self.max_iterations)
        return int(math.ceil(self.max_iter_factor * self.iteration_bound()))


@dataclass
class StepRecord:
    iteration: int
    kind: StepKind
    constraint_index: int | None
    step_size: float
    subgradient_dual_norm: float
    objective_value: float
    max_constraint_value: float | None
    subgradient: np.ndarray

    def to_record(self) -> dict:
        return {
            "iteration": self.iteration,
            "kind": self.kind.value,
            "constraint_index": self.constraint_index,
            "step_size": self.step_size,
            "subgradient_dual_norm": self.subgradient_dual_norm,
            "objective_value": self.objective_value,
            "max_constraint_value": self.max_constraint_value,
        }


@dataclass
class SolverState:
    x: np.ndarray
    N: int = 0
    productive_set: list[int] = field(default_factory=list)
    nonproductive_weight: float = 0.0
    step_log: list[StepRecord] = field(default_factory=list)
    iterates: list[np.ndarray] = field(default_factory=list)


@dataclass
class SolverReport:
    best_productive_point: np.ndarray | None
    best_productive_value: float
    iterations_used: int
    stop_reason: StopReason
    state: SolverState
    iteration_bound: int
    safety_cap: int

    @property
    def productive_points(self) -> list[np.ndarray]:
        return [self.state.iterates[k] for k in self.state.productive_set]

    @property
    def diagnostics(self) -> list[str]:
        out = []
        if not self.state.productive_set:
            out.append("no productive step was taken")
        return out


def theoretical_iteration_bound(epsilon: float, theta0: float, M_g: float) -> int:
    """``ceil(2 max(1, M_g^2) theta0^2 / epsilon^2)``."""
    if not (epsilon > 0 and theta0 > 0 and M_g >= 0):
        raise InvalidInputError("epsilon and theta0 must be positive, M_g non-negative")
    return int(math.ceil(2.0 * max(1.0, M_g**2) * theta0**2 / epsilon**2))


def stopping_criterion(state: SolverState, epsilon: float, theta0: float) -> bool:
    return theta0**2 <= 0.5 * epsilon**2 * (len(state.productive_set) + state.nonproductive_weight)


def solve(problem: Problem) -> SolverReport:
    prox = problem.prox
    f = problem.objective
    eps = problem.epsilon
    cap = problem.safety_cap()
    norm_kind = prox.norm
    selection = MinDualNorm(norm_kind)

    x = prox.start_point()
    state = SolverState(x=x, iterates=[x])
    best_x, best_val = None, math.inf
    stop = StopReason.SAFETY_CAP

    while state.N < cap:
        fx = f.value(x)
        if problem.constraints:
            gmax, m = max_constraint(x, problem.constraints, threshold=eps)
        else:
            gmax, m = -math.inf, None
        if gmax <= eps:
            p = subgradient_selection(f.subdifferential(x), selection)
            pn = dual_norm(p, norm_kind)
            if pn == 0.0:
                stop = StopReason.ZERO_OBJECTIVE_SUBGRADIENT
                if fx < best_val:
                    best_x, best_val = x, fx
                break
            h = eps / pn
            kind, index = StepKind.PRODUCTIVE, None
            state.productive_set.append(state.N)
            if fx < best_val:
                best_x, best_val = x, fx
        else:
            p = problem.constraints[m].subgradient(x)
            pn = dual_norm(p, norm_kind)
            if pn == 0.0:
                raise OracleInconsistencyError(
                    f"constraint {m} is {gmax:.6g} > epsilon but reports a zero subgradient")
            h = eps / pn**2
            kind, index = StepKind.NONPRODUCTIVE, m
            state.nonproductive_weight += 1.0 / pn**2
        logged_g = gmax if problem.constraints else None
        state.step_log.append(StepRecord(state.N, kind, index, h, pn, fx, logged_g, p))
        x = prox.mirror_step(x, p, h)
        state.N += 1
        state.iterates.append(x)
        state.x = x
        if stopping_criterion(state, eps, problem.theta0):
            stop = StopReason.CRITERION_MET
            break

    return SolverReport(
        best_productive_point=None if best_x is None else best_x.copy(),
        best_productive_value=best_val,
        iterations_used=state.N,
        stop_reason=stop,
        state=state,
        iteration_bound=problem.iteration_bound(),
        safety_cap=cap,
    )
