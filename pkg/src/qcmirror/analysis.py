"""Post-hoc certificates for solver runs.

``v_f(x, y) = <g / ||g||_*, x - y>`` with ``g`` the min-dual-norm element of
the Clarke subdifferential at ``x`` (the same element the solver steps
along). ``omega(tau)`` is the largest objective increase over feasible points
within ``tau`` of ``x_star``, evaluated on a fixed lattice so it is monotone in
``tau`` by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bruteforce import lattice
from .errors import DomainError, InvalidInputError, UnsupportedError
from .geometry import FeasibleSet, NormKind, as_vector, dual_norm, norm
from .oracles import MinDualNorm, ObjectiveOracle, subgradient_selection
from .prox import ProxSetup
from .solver import Problem, SolverReport, StopReason

OMEGA_GRID = {1: 10_001, 2: 300, 3: 60}
CERT_SLACK = 1e-9


def v_f(f: ObjectiveOracle, x, y, norm_kind: NormKind = NormKind.EUCLIDEAN) -> float:
    x, y = as_vector(x), as_vector(y)
    g = subgradient_selection(f.subdifferential(x), MinDualNorm(norm_kind))
    gn = dual_norm(g, norm_kind)
    if gn == 0.0:
        raise DomainError("v_f is undefined where the selected subgradient is zero")
    return float(g @ (x - y)) / gn


def hyperplane_distance(f: ObjectiveOracle, x, x_star) -> float:
    """Euclidean distance from ``x_star`` to ``{y : <grad f(x), y - x> = 0}``."""
    x, x_star = as_vector(x), as_vector(x_star)
    g = subgradient_selection(f.subdifferential(x), MinDualNorm(NormKind.EUCLIDEAN))
    return abs(float(g @ (x - x_star))) / float(np.linalg.norm(g))


class OmegaEnvelope:
    """``tau -> max {f(z) - f(x_star) : z in Q, ||z - x_star|| <= tau}`` on a lattice.

    ``slack(tau)`` bounds how far the lattice maximum can fall below the true
    one: ``lipschitz * min(tau, 2 sqrt(n) spacing)``.
    """

    def __init__(self, f: ObjectiveOracle, x_star, feasible_set: FeasibleSet,
                 norm_kind: NormKind = NormKind.EUCLIDEAN, per_dim: int | None = None,
                 lipschitz: float | None = None):
        self.x_star = as_vector(x_star, "x_star")
        n = self.x_star.size
        if n > 3:
            raise UnsupportedError("omega is computed by lattice search only for dimension <= 3")
        if not feasible_set.contains(self.x_star):
            raise DomainError("x_star is not in the feasible set")
        per_dim = per_dim or OMEGA_GRID[n]
        pts = np.vstack([lattice(feasible_set, per_dim), self.x_star[None, :]])
        f_star = f.value(self.x_star)
        diffs = pts - self.x_star
        if norm_kind is NormKind.EUCLIDEAN:
            dist = np.linalg.norm(diffs, axis=1)
        elif norm_kind is NormKind.L1:
            dist = np.abs(diffs).sum(axis=1)
        else:
            dist = np.abs(diffs).max(axis=1)
        gaps = f.values(pts) - f_star
        order = np.argsort(dist, kind="stable")
        self.dist = dist[order]
        self.running_max = np.maximum.accumulate(gaps[order])
        lo, hi = feasible_set.bounding_box()
        self.spacing = float(np.max(hi - lo)) / (per_dim - 1)
        self.dim = n
        if lipschitz is None:
            lipschitz = self._estimate_lipschitz(f, pts)
        self.lipschitz = float(lipschitz)

    @staticmethod
    def _estimate_lipschitz(f: ObjectiveOracle, pts: np.ndarray) -> float:
        # convex-hull vertices of the subdifferential bound the slope locally;
        # sample a thinned subset of the lattice
        step = max(1, len(pts) // 2000)
        best = 0.0
        for p in pts[::step]:
            best = max(best, float(np.max(np.linalg.norm(f.subdifferential(p).vertices, axis=1))))
        return best * 1.05 + 1e-12

    def __call__(self, tau: float) -> float:
        if tau < 0:
            raise InvalidInputError("tau must be non-negative")
        idx = int(np.searchsorted(self.dist, tau, side="right"))
        return float(self.running_max[idx - 1]) if idx > 0 else 0.0

    def slack(self, tau: float) -> float:
        return self.lipschitz * min(tau, 2.0 * math.sqrt(self.dim) * self.spacing)


def omega(f: ObjectiveOracle, x_star, tau: float, feasible_set: FeasibleSet,
          grid: int | None = None, norm_kind: NormKind = NormKind.EUCLIDEAN) -> float:
    if tau < 0:
        raise InvalidInputError("tau must be non-negative")
    return OmegaEnvelope(f, x_star, feasible_set, norm_kind, per_dim=grid, lipschitz=0.0)(tau)


@dataclass
class Theorem3Check:
    holds: bool
    gap: float
    v_f: float
    omega: float
    slack: float

    def __bool__(self) -> bool:
        return self.holds


def theorem3_check(f: ObjectiveOracle, x, x_star, feasible_set: FeasibleSet | None = None,
                   envelope: OmegaEnvelope | None = None,
                   norm_kind: NormKind = NormKind.EUCLIDEAN) -> Theorem3Check:
    """``f(x) - f(x_star) <= omega(v_f(x, x_star)) + slack``.

    A negative ``v_f`` is clamped to zero before evaluating ``omega``.
    """
    if envelope is None:
        if feasible_set is None:
            raise InvalidInputError("need a feasible set or a precomputed envelope")
        envelope = OmegaEnvelope(f, x_star, feasible_set, norm_kind)
    x = as_vector(x)
    vf = v_f(f, x, x_star, norm_kind)
    tau = max(vf, 0.0)
    om = envelope(tau)
    sl = envelope.slack(tau)
    gap = f.value(x) - f.value(x_star)
    return Theorem3Check(holds=gap <= om + sl + CERT_SLACK, gap=gap, v_f=vf, omega=om, slack=sl)


@dataclass
class CertificateResult:
    stop_reason: str
    theorem2_applicable: bool
    min_vf: float | None = None
    vf_bound_holds: bool | None = None
    objective_gap: float | None = None
    gap_bound: float | None = None
    gap_bound_holds: bool | None = None
    constraint_residuals_ok: bool | None = None
    max_productive_constraint: float | None = None
    max_nonproductive_constraint: float | None = None
    iterations_used: int = 0
    iteration_bound: int = 0
    iteration_bound_holds: bool | None = None
    diagnostics: list[str] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        checks = [self.vf_bound_holds, self.gap_bound_holds, self.constraint_residuals_ok,
                  self.iteration_bound_holds]
        return not self.diagnostics and all(c is not False for c in checks)

    def to_record(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__} | {"all_hold": self.all_hold}


def certify(report: SolverReport, problem: Problem, x_star=None, L: float | None = None,
            delta: float | None = None) -> CertificateResult:
    """Evaluate the accuracy guarantees on a finished run.

    The ``min v_f < epsilon`` clause and the iteration bound apply only when
    the run stopped on its criterion. Gap clauses need ``x_star``. Constraint
    values at productive iterates are always checked; non-productive ones are
    reported but not asserted.
    """
    f = problem.objective
    eps = problem.epsilon
    L = f.lipschitz_grad if L is None else float(L)
    delta = f.delta if delta is None else float(delta)
    kind = problem.prox.norm
    applicable = report.stop_reason is StopReason.CRITERION_MET
    res = CertificateResult(stop_reason=report.stop_reason.value, theorem2_applicable=applicable,
                            iterations_used=report.iterations_used, iteration_bound=report.iteration_bound)
    if applicable:
        res.iteration_bound_holds = report.iterations_used <= report.iteration_bound

    prod = report.productive_points
    nonprod = [report.state.iterates[r.iteration] for r in report.state.step_log
               if r.kind.value == "nonproductive"]
    if problem.constraints and nonprod:
        res.max_nonproductive_constraint = max(g.value(p) for p in nonprod for g in problem.constraints)
    if not prod:
        res.diagnostics.append("empty productive set: no certificate can be formed")
        return res

    if problem.constraints:
        worst = max(g.value(p) for p in prod for g in problem.constraints)
        res.max_productive_constraint = worst
        res.constraint_residuals_ok = worst <= eps + CERT_SLACK
    else:
        res.constraint_residuals_ok = True

    if x_star is not None:
        x_star = as_vector(x_star, "x_star")
        vfs = [v_f(f, p, x_star, kind) for p in prod]
        res.min_vf = min(vfs)
        if applicable:
            res.vf_bound_holds = res.min_vf < eps + CERT_SLACK
        f_star = f.value(x_star)
        res.objective_gap = min(f.value(p) for p in prod) - f_star
        g_star = max(dual_norm(v, kind) for v in f.subdifferential(x_star).vertices)
        res.gap_bound = eps * (g_star + delta) + 0.5 * L * eps**2
        if applicable:
            res.gap_bound_holds = res.objective_gap <= res.gap_bound + CERT_SLACK
    return res


def lemma1_residual(prox: ProxSetup, x, p, h: float, u) -> float:
    """``h <p, x - u> - (h^2/2 ||p||_*^2 + V(x, u) - V(z, u))`` with ``z`` the mirror step."""
    x, p, u = as_vector(x), as_vector(p), as_vector(u)
    if not h > 0:
        raise InvalidInputError("h must be positive")
    if not np.any(p):
        # zero step: z = x and both sides vanish
        return 0.0
    z = prox.mirror_step(x, p, h)
    lhs = h * float(p @ (x - u))
    rhs = 0.5 * h**2 * dual_norm(p, prox.norm) ** 2 + prox.bregman(x, u) - prox.bregman(z, u)
    return lhs - rhs


def replay_lemma1(report: SolverReport, prox: ProxSetup, probes) -> float:
    """Largest one-step mirror inequality residual over every logged step and probe point."""
    worst = -math.inf
    iterates = report.state.iterates
    for rec in report.state.step_log:
        x = iterates[rec.iteration]
        for u in probes:
            worst = max(worst, lemma1_residual(prox, x, rec.subgradient, rec.step_size, u))
    return worst
