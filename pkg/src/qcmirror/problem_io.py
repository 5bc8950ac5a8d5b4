"""JSON problem files.

Top-level keys::

    objective    {"type": "example1", "k", "delta"}
                 {"type": "maxquad", "pieces": [{"A", "b", "alpha"}], "L"?, "delta"?}
                 {"type": "quadratic", "A", "b"?, "alpha"?}
    constraints  [{"type": "linear", "a", "b"},
                  {"type": "norm_ball_residual", "center", "radius", "norm"?}]
    prox         {"kind": "euclidean_box", "set": {"lower", "upper"}, "center"?}
                 {"kind": "euclidean_ball", "set": {"center", "radius"}, "center"?}
                 {"kind": "entropy_simplex", "set": {"dimension"}}
    epsilon, theta0, max_iterations?, x_star?

``prox`` may be omitted for ``example1`` (defaults to the box [0, 1]).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InvalidInputError, ProblemFormatError
from .funclib import Example1Function, Example1Lifted, MaxQuadObjective, QuadraticPiece
from .geometry import Box, EuclideanBall, NormKind, Simplex
from .oracles import ConstraintOracle, LinearConstraint, NormBallResidual, ObjectiveOracle
from .prox import ProxKind, ProxSetup
from .solver import Problem


def _get(doc: dict, key: str, path: str, default=...):
    if not isinstance(doc, dict):
        raise ProblemFormatError(f"{path}: expected an object")
    if key not in doc:
        if default is ...:
            raise ProblemFormatError(f"{path}.{key}: required field is missing")
        return default
    return doc[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProblemFormatError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _array(value, path: str, ndim: int) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"{path}: not a numeric array ({exc})") from None
    if arr.ndim != ndim:
        raise ProblemFormatError(f"{path}: expected a {ndim}-D array, got shape {arr.shape}")
    return arr


def _wrap(path: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except InvalidInputError as exc:
        raise ProblemFormatError(f"{path}: {exc}") from None


def parse_prox(doc: dict | None, objective_type: str) -> ProxSetup:
    if doc is None:
        if objective_type == "example1":
            return ProxSetup.euclidean_box([0.0], [1.0])
        raise ProblemFormatError("prox: required field is missing")
    kind = _get(doc, "kind", "prox")
    try:
        kind = ProxKind(kind)
    except ValueError:
        raise ProblemFormatError(f"prox.kind: unknown kind {kind!r}") from None
    s = _get(doc, "set", "prox")
    center = doc.get("center")
    if center is not None:
        center = _array(center, "prox.center", 1)
    if kind is ProxKind.EUCLIDEAN_BOX:
        fs = _wrap("prox.set", Box, _array(_get(s, "lower", "prox.set"), "prox.set.lower", 1),
                   _array(_get(s, "upper", "prox.set"), "prox.set.upper", 1))
    elif kind is ProxKind.EUCLIDEAN_BALL:
        fs = _wrap("prox.set", EuclideanBall, _array(_get(s, "center", "prox.set"), "prox.set.center", 1),
                   _number(_get(s, "radius", "prox.set"), "prox.set.radius"))
    else:
        dim = _get(s, "dimension", "prox.set")
        if isinstance(dim, bool) or not isinstance(dim, int):
            raise ProblemFormatError(f"prox.set.dimension: expected an integer, got {dim!r}")
        fs = _wrap("prox.set", Simplex, dim)
    return _wrap("prox", ProxSetup, kind, fs, center)


def parse_objective(doc: dict, prox_doc: dict | None) -> tuple[ObjectiveOracle, str]:
    typ = _get(doc, "type", "objective")
    if typ == "example1":
        func = _wrap("objective", Example1Function,
                     _number(_get(doc, "k", "objective"), "objective.k"),
                     _number(_get(doc, "delta", "objective"), "objective.delta"))
        return Example1Lifted(func), typ
    if typ == "quadratic":
        A = _array(_get(doc, "A", "objective"), "objective.A", 2)
        b = _array(doc.get("b", np.zeros(A.shape[0])), "objective.b", 1)
        piece = _wrap("objective", QuadraticPiece, A, b, _number(doc.get("alpha", 0.0), "objective.alpha"))
        return MaxQuadObjective([piece]), typ
    if typ == "maxquad":
        raw = _get(doc, "pieces", "objective")
        if not isinstance(raw, list) or not raw:
            raise ProblemFormatError("objective.pieces: expected a nonempty list")
        pieces = []
        for i, p in enumerate(raw):
            path = f"objective.pieces[{i}]"
            pieces.append(_wrap(path, QuadraticPiece,
                                _array(_get(p, "A", path), f"{path}.A", 2),
                                _array(_get(p, "b", path), f"{path}.b", 1),
                                _number(p.get("alpha", 0.0) if isinstance(p, dict) else 0.0, f"{path}.alpha")))
        L = doc.get("L")
        delta = doc.get("delta")
        bounds = None
        if delta is None and len(pieces) > 1:
            bounds = parse_prox(prox_doc, typ).feasible_set
        return _wrap("objective", MaxQuadObjective, pieces,
                     lipschitz_grad=None if L is None else _number(L, "objective.L"),
                     delta=None if delta is None else _number(delta, "objective.delta"),
                     bounds=bounds), typ
    raise ProblemFormatError(f"objective.type: unknown type {typ!r}")


def parse_constraints(raw, norm_kind: NormKind) -> list[ConstraintOracle]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise ProblemFormatError("constraints: expected a list")
    out = []
    for i, c in enumerate(raw):
        path = f"constraints[{i}]"
        typ = _get(c, "type", path)
        if typ == "linear":
            out.append(_wrap(path, LinearConstraint, _array(_get(c, "a", path), f"{path}.a", 1),
                             _number(_get(c, "b", path), f"{path}.b"), norm_kind))
        elif typ == "norm_ball_residual":
            try:
                ball_norm = NormKind(c.get("norm", "l2"))
            except ValueError:
                raise ProblemFormatError(f"{path}.norm: unknown norm {c.get('norm')!r}") from None
            out.append(_wrap(path, NormBallResidual, _array(_get(c, "center", path), f"{path}.center", 1),
                             _number(_get(c, "radius", path), f"{path}.radius"), ball_norm, norm_kind))
        else:
            raise ProblemFormatError(f"{path}.type: unknown type {typ!r}")
    return out


def problem_from_dict(doc: dict, epsilon: float | None = None, theta0: float | None = None,
                      max_iter_factor: float | None = None) -> Problem:
    if not isinstance(doc, dict):
        raise ProblemFormatError("top level: expected an object")
    prox_doc = doc.get("prox")
    objective, typ = parse_objective(_get(doc, "objective", "top level"), prox_doc)
    prox = parse_prox(prox_doc, typ)
    constraints = parse_constraints(doc.get("constraints"), prox.norm)
    for i, g in enumerate(constraints):
        dim = (g.a if isinstance(g, LinearConstraint) else g.center).size
        if dim != prox.dim:
            raise ProblemFormatError(f"constraints[{i}]: dimension {dim} does not match prox dimension {prox.dim}")
    eps = epsilon if epsilon is not None else _number(_get(doc, "epsilon", "top level"), "epsilon")
    th = theta0 if theta0 is not None else _number(_get(doc, "theta0", "top level"), "theta0")
    max_iter = doc.get("max_iterations")
    kwargs: dict[str, Any] = {}
    if max_iter_factor is not None:
        kwargs["max_iter_factor"] = max_iter_factor
    return _wrap("top level", Problem, objective, constraints, prox, eps, th,
                 max_iterations=None if max_iter is None else int(max_iter), **kwargs)


def read_document(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProblemFormatError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_problem(path, **overrides) -> Problem:
    return problem_from_dict(read_document(path), **overrides)


def objective_to_dict(f: ObjectiveOracle) -> dict:
    if isinstance(f, Example1Lifted):
        return {"type": "example1", "k": f.func.k, "delta": f.func.delta}
    if isinstance(f, MaxQuadObjective):
        if len(f.pieces) == 1:
            p = f.pieces[0]
            return {"type": "quadratic", "A": p.A.tolist(), "b": p.b.tolist(), "alpha": p.alpha}
        return {
            "type": "maxquad",
            "pieces": [{"A": p.A.tolist(), "b": p.b.tolist(), "alpha": p.alpha} for p in f.pieces],
            "L": f.lipschitz_grad,
            "delta": f.delta,
        }
    raise InvalidInputError(f"cannot serialise objective of type {type(f).__name__}")


def constraint_to_dict(g: ConstraintOracle) -> dict:
    if isinstance(g, LinearConstraint):
        return {"type": "linear", "a": g.a.tolist(), "b": g.b}
    if isinstance(g, NormBallResidual):
        return {"type": "norm_ball_residual", "center": g.center.tolist(), "radius": g.radius,
                "norm": g.ball_norm.value}
    raise InvalidInputError(f"cannot serialise constraint of type {type(g).__name__}")


def prox_to_dict(prox: ProxSetup) -> dict:
    fs = prox.feasible_set
    if isinstance(fs, Box):
        out = {"kind": prox.kind.value, "set": {"lower": fs.lower.tolist(), "upper": fs.upper.tolist()}}
    elif isinstance(fs, EuclideanBall):
        out = {"kind": prox.kind.value, "set": {"center": fs.center.tolist(), "radius": fs.radius}}
    else:
        return {"kind": prox.kind.value, "set": {"dimension": fs.dimension}}
    out["center"] = prox.center.tolist()
    return out


def problem_to_dict(problem: Problem) -> dict:
    doc = {
        "objective": objective_to_dict(problem.objective),
        "constraints": [constraint_to_dict(g) for g in problem.constraints],
        "prox": prox_to_dict(problem.prox),
        "epsilon": problem.epsilon,
        "theta0": problem.theta0,
    }
    if problem.max_iterations is not None:
        doc["max_iterations"] = problem.max_iterations
    return doc


def dump_problem(problem: Problem, path, x_star=None) -> None:
    doc = problem_to_dict(problem)
    if x_star is not None:
        doc["x_star"] = [float(v) for v in x_star]
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
