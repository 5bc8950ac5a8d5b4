"""Adaptive mirror descent for quasiconvex objectives with convex constraints,
plus numerical checks of its interpolation and accuracy guarantees."""

from .analysis import (CertificateResult, OmegaEnvelope, certify, hyperplane_distance, lemma1_residual,
                       omega, replay_lemma1, theorem3_check, v_f)
from .errors import (DomainError, InvalidInputError, OracleInconsistencyError, ProblemFormatError,
                     UnsupportedError)
from .funclib import (Example1Function, Example1Lifted, MaxQuadObjective, QuadraticPiece,
                      abs_first_coordinate, half_squared_norm, quadratic)
from .geometry import Box, EuclideanBall, NormKind, Simplex, dual_norm, norm
from .interp import check_interpolation, clarke_dd_estimate, scan_segment
from .oracles import (LinearConstraint, NormBallResidual, SubgradientSet, max_constraint,
                      subgradient_selection)
from .problem_io import dump_problem, load_problem
from .prox import ProxKind, ProxSetup
from .solver import Problem, SolverReport, StepKind, StopReason, solve, theoretical_iteration_bound

__version__ = "0.1.0"
