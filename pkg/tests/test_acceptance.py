"""Acceptance criteria 1-10, one test per criterion.

Every expected value comes from an oracle that does not share code with the
quantity under test: exact rational arithmetic, analytic formulas, lattice
search, or a general-purpose constrained solver.
"""

import json
import math
from functools import lru_cache
from pathlib import Path

import numpy as np

from qcmirror.analysis import OmegaEnvelope, certify, lemma1_residual, replay_lemma1, theorem3_check
from qcmirror.benchmarks import BENCH_EPSILONS, BENCHMARKS
from qcmirror.bruteforce import grid_minimize, lattice, mirror_step_bruteforce
from qcmirror.cli import run
from qcmirror.funclib import Example1Function, Example1Lifted, abs_first_coordinate, half_squared_norm, quadratic
from qcmirror.geometry import Box, dual_norm
from qcmirror.interp import check_interpolation, clarke_dd_estimate, sample_segments, smooth_bound_residuals
from qcmirror.problem_io import load_problem
from qcmirror.prox import ProxSetup, theta0_is_honest
from qcmirror.solver import StopReason, solve

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"
EXAMPLE1_PARAMS = [(1.0, 1.0), (5.0, 0.1), (0.5, 2.0)]
SEED = 12345


@lru_cache(maxsize=None)
def benchmark_runs():
    """Every (benchmark, epsilon) pair solved once and shared by criteria 3, 5, 6 and 7."""
    out = []
    for name, make in BENCHMARKS.items():
        for eps in BENCH_EPSILONS:
            b = make(eps)
            out.append((b, solve(b.problem)))
    return out


def test_criterion_01_theorem1_example1(acceptance):
    rng = np.random.default_rng(SEED)
    worst, failures, control_failures = -math.inf, 0, {}
    for k, d in EXAMPLE1_PARAMS:
        f = Example1Lifted(Example1Function(k, d))
        pairs = sample_segments(rng, [0.0], [1.0], 1000, toward_upper=True)
        assert all(x[0] < y[0] for x, y in pairs)
        reports = [check_interpolation(f, x, y, L=0.0, delta=d, rtol=1e-8) for x, y in pairs]
        failures += sum(not r.holds for r in reports)
        worst = max(worst, max(r.residual for r in reports))
        control = [check_interpolation(f, x, y, L=0.0, delta=0.5 * d, rtol=1e-8) for x, y in pairs]
        control_failures[(k, d)] = sum(not r.holds for r in control)
    ok = failures == 0 and all(v >= 1 for v in control_failures.values())
    acceptance(1, "interpolation inequality on Example 1, 3 x 1000 segments", ok,
               f"failures={failures}, max residual={worst:.3g}, control failures={list(control_failures.values())}")
    assert ok


def test_criterion_02_smooth_baseline(acceptance):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 4))
        Qm, _ = np.linalg.qr(rng.normal(size=(n, n)))
        lam = rng.uniform(0.0, 3.0, size=n)
        A = Qm @ np.diag(lam) @ Qm.T
        A = 0.5 * (A + A.T)
        f = quadratic(A, rng.normal(size=n), rng.normal())
        x, y = rng.uniform(-2, 2, size=n), rng.uniform(-2, 2, size=n)
        worst = max(worst, *smooth_bound_residuals(f, x, y, float(lam.max())))
    tight = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 4))
        f = half_squared_norm(n)
        x, y = rng.uniform(-2, 2, size=n), rng.uniform(-2, 2, size=n)
        tight = max(tight, abs(smooth_bound_residuals(f, x, y, 1.0)[0]))
    ok = worst <= 1e-10 and tight <= 1e-10
    acceptance(2, "two-sided smooth bound, 1000 pairs, tight for 0.5|x|^2", ok,
               f"max residual={worst:.3g}, tightness gap={tight:.3g}")
    assert ok


def _random_setup(rng, kind, n):
    if kind == "box":
        lo = rng.uniform(-2, 0, size=n)
        return ProxSetup.euclidean_box(lo, lo + rng.uniform(0.5, 3, size=n))
    if kind == "ball":
        return ProxSetup.euclidean_ball(rng.uniform(-1, 1, size=n), rng.uniform(0.3, 2))
    return ProxSetup.entropy_simplex(n)


def _random_point(rng, setup):
    if setup.is_entropy:
        return rng.dirichlet(np.ones(setup.dim))
    lo, hi = setup.feasible_set.bounding_box()
    return setup.feasible_set.project(rng.uniform(lo, hi))


def test_criterion_03_lemma1(acceptance):
    rng = np.random.default_rng(SEED)
    worst_draw = {}
    for kind in ("box", "ball", "simplex"):
        worst = -math.inf
        for _ in range(1000):
            setup = _random_setup(rng, kind, int(rng.integers(1, 4)))
            x, u = _random_point(rng, setup), _random_point(rng, setup)
            p = rng.normal(size=setup.dim) * rng.uniform(0.1, 5)
            worst = max(worst, lemma1_residual(setup, x, p, rng.uniform(1e-3, 2.0), u))
        worst_draw[kind] = worst
    traces = [(b.problem, rep, [b.x_star]) for b, rep in benchmark_runs()]
    for name in ("simplex_3d.json", "example1.json"):
        problem = load_problem(PROBLEMS / name)
        traces.append((problem, solve(problem), []))
    worst_trace = -math.inf
    steps = 0
    for problem, rep, extra in traces:
        fs = problem.prox.feasible_set
        probes = list(lattice(fs, 7)) + [np.asarray(e) for e in extra]
        worst_trace = max(worst_trace, replay_lemma1(rep, problem.prox, probes))
        steps += len(rep.state.step_log)
    ok = all(v <= 1e-7 for v in worst_draw.values()) and worst_trace <= 1e-7
    acceptance(3, "one-step mirror inequality on random draws and on every solver step", ok,
               ", ".join(f"{k}={v:.3g}" for k, v in worst_draw.items())
               + f", traces={worst_trace:.3g} over {steps} steps")
    assert ok


def test_criterion_04_mirror_step_oracle(acceptance):
    rng = np.random.default_rng(SEED)
    worst = {}
    for kind in ("box", "ball", "simplex"):
        err = 0.0
        for i in range(200):
            setup = _random_setup(rng, kind, 1 + i % 3)
            x = _random_point(rng, setup)
            p = rng.normal(size=setup.dim) * rng.uniform(0.1, 3)
            h = rng.uniform(0.05, 1.5)
            err = max(err, float(np.max(np.abs(setup.mirror_step(x, p, h) - mirror_step_bruteforce(setup, x, p, h)))))
        worst[kind] = err
    ok = all(v <= 1e-6 for v in worst.values())
    acceptance(4, "closed-form mirror step vs brute force, 3 x 200 instances", ok,
               ", ".join(f"{k}={v:.3g}" for k, v in worst.items()))
    assert ok


def test_criterion_05_iteration_bound(acceptance):
    rows, ok = [], True
    for b, rep in benchmark_runs():
        p = b.problem
        honest = theta0_is_honest(p.prox, b.x_star, p.theta0)
        # M_g must bound every constraint subgradient met on the trace
        mg_honest = all(dual_norm(g.subgradient(x), p.prox.norm) <= p.M_g + 1e-12
                        for x in rep.state.iterates for g in p.constraints)
        bound = math.ceil(2 * max(1.0, p.M_g**2) * p.theta0**2 / p.epsilon**2)
        good = (honest and mg_honest and rep.stop_reason is StopReason.CRITERION_MET
                and rep.iterations_used <= bound and bound == rep.iteration_bound)
        ok &= good
        rows.append(f"{b.name}@{p.epsilon}:{rep.iterations_used}/{bound}")
    acceptance(5, "iterations within the bound on both benchmarks, 4 epsilons", ok, " ".join(rows))
    assert ok


def test_criterion_06_vf_certificate(acceptance):
    rows, ok = [], True
    for b, rep in benchmark_runs():
        c = certify(rep, b.problem, x_star=b.x_star, L=b.L, delta=b.delta)
        good = c.theorem2_applicable and c.min_vf < b.problem.epsilon
        ok &= good
        rows.append(f"{b.name}@{b.problem.epsilon}:{c.min_vf:.3g}")
    acceptance(6, "min v_f over productive iterates below epsilon", ok, " ".join(rows))
    assert ok


def test_criterion_07_accuracy(acceptance):
    rows, ok = [], True
    for b, rep in benchmark_runs():
        p = b.problem
        f = p.objective
        f_star = f.value(b.x_star)
        gap = min(f.value(x) for x in rep.productive_points) - f_star
        gstar = max(dual_norm(v, p.prox.norm) for v in f.subdifferential(b.x_star).vertices)
        bound = p.epsilon * (gstar + b.delta) + 0.5 * b.L * p.epsilon**2
        feasible = max(g.value(x) for x in rep.productive_points for g in p.constraints)
        c = certify(rep, p, x_star=b.x_star, L=b.L, delta=b.delta)
        good = gap <= bound + 1e-12 and feasible <= p.epsilon + 1e-12 and c.gap_bound_holds \
            and c.constraint_residuals_ok
        ok &= good
        rows.append(f"{b.name}@{p.epsilon}:gap={gap:.3g}<={bound:.3g},g={feasible:.3g}")
    acceptance(7, "objective gap bound and constraint residuals at productive iterates", ok, " ".join(rows))
    assert ok


def _theorem3_instances():
    """(name, f, Q, x_star, radius of a ball around x_star inside Q)."""
    out = [
        ("example1", Example1Lifted(Example1Function(1.0, 1.0)), Box([0.0], [1.0]), np.array([0.0]), 1.0),
        ("example1(5,0.1)", Example1Lifted(Example1Function(5.0, 0.1)), Box([0.0], [1.0]), np.array([0.0]), 1.0),
        ("half_sq_1d", half_squared_norm(1), Box([-2.0], [2.0]), np.array([0.0]), 2.0),
        ("half_sq_2d", half_squared_norm(2), Box([-2.0, -2.0], [2.0, 2.0]), np.zeros(2), 2.0),
    ]
    Q = Box([-1.0, -1.0], [1.0, 1.0])
    g = abs_first_coordinate(2)
    out.append(("abs_x1", g, Q, grid_minimize(g, Q), 0.5))
    f = BENCHMARKS["maxquad_2d"](0.1).problem.objective
    Q = Box([-2.0, -2.0], [2.0, 2.0])
    xs = grid_minimize(f, Q)
    out.append(("maxquad_2d", f, Q, xs, float(np.min(np.minimum(xs - Q.lower, Q.upper - xs)))))
    return out


def test_criterion_08_theorem3(acceptance):
    rng = np.random.default_rng(SEED)
    rows, ok = [], True
    taus = np.linspace(0.0, 3.0, 50)
    for name, f, Q, xs, radius in _theorem3_instances():
        env = OmegaEnvelope(f, xs, Q)
        held = 0
        for _ in range(100):
            # points within a ball around x_star inside Q, so the nearest point
            # of the level hyperplane stays feasible
            if xs.size == 1:
                x = rng.uniform(np.maximum(Q.lower, xs - radius), np.minimum(Q.upper, xs + radius))
            else:
                d = rng.normal(size=xs.size)
                x = xs + d / np.linalg.norm(d) * radius * math.sqrt(rng.uniform())
            held += bool(theorem3_check(f, x, xs, envelope=env))
        vals = [env(t) for t in taus]
        monotone = all(a <= b for a, b in zip(vals, vals[1:]))
        ok &= held == 100 and monotone
        rows.append(f"{name}:{held}/100{'' if monotone else ' non-monotone'}")
    acceptance(8, "omega bound on the gap, 100 points per instance, omega monotone", ok, " ".join(rows))
    assert ok


def test_criterion_09_clarke(acceptance):
    rng = np.random.default_rng(SEED)
    worst = {}
    for k, d in EXAMPLE1_PARAMS:
        f = Example1Lifted(Example1Function(k, d))
        kinks = [np.array([1 - 2.0**-n]) for n in range(1, 21)]
        smooth = []
        while len(smooth) < 20:
            t = rng.uniform(0.0, 0.999)
            n = round(-math.log2(1 - t)) if t > 0 else 0
            if all(abs(t - (1 - 2.0**-m)) > 1e-3 for m in range(max(1, n - 1), n + 2)):
                smooth.append(np.array([t]))
        err = 0.0
        for x in kinks + smooth:
            for h in (np.array([1.0]), np.array([-1.0])):
                err = max(err, abs(clarke_dd_estimate(f, x, h) - f.subdifferential(x).support(h)))
        worst[f"ex1({k},{d})"] = err
    g = abs_first_coordinate(2)
    kinks = [np.array([0.0, t]) for t in rng.uniform(-1, 1, size=20)]
    smooth = [np.array([s * rng.uniform(1e-2, 1), rng.uniform(-1, 1)]) for s in rng.choice([-1, 1], size=20)]
    err = 0.0
    for x in kinks + smooth:
        h = rng.normal(size=2)
        err = max(err, abs(clarke_dd_estimate(g, x, h) - g.subdifferential(x).support(h)))
    worst["abs_x1"] = err
    ok = all(v <= 1e-4 for v in worst.values())
    acceptance(9, "Clarke estimate vs exact support at 20 kink and 20 smooth points", ok,
               ", ".join(f"{k}={v:.3g}" for k, v in worst.items()))
    assert ok


def _drop_timestamp(text):
    doc = json.loads(text)
    stamp = doc.pop("timestamp")
    return json.dumps(doc, indent=2, sort_keys=True), stamp


def test_criterion_10_determinism(acceptance, tmp_path):
    commands = [
        ["solve", str(PROBLEMS / "quadratic_1d.json")],
        ["solve", str(PROBLEMS / "maxquad_2d.json"), "--format", "csv"],
        ["certify", str(PROBLEMS / "maxquad_2d.json")],
        ["interp-check", str(PROBLEMS / "example1.json"), "--seed", "3"],
        ["bench", "--builtin", "maxquad_2d", "--jobs", "4"],
    ]
    same = 0
    for i, argv in enumerate(commands):
        outs = []
        for rep in range(2):
            path = tmp_path / f"out{i}_{rep}"
            run(argv + ["--out", str(path)])
            outs.append(path.read_text())
        if "--format" in argv:
            same += outs[0] == outs[1]
        else:
            (a, _), (b, _) = _drop_timestamp(outs[0]), _drop_timestamp(outs[1])
            lines = [[ln for ln in o.splitlines() if '"timestamp"' not in ln] for o in outs]
            same += a == b and lines[0] == lines[1]
    ok = same == len(commands)
    acceptance(10, "byte-identical reports apart from the timestamp", ok, f"{same}/{len(commands)} commands")
    assert ok
