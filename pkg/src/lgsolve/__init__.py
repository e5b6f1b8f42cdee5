"""Least gradient problems on convex planar domains.

Level-by-level chord construction on bounded convex domains, truncation
schemes for unbounded domains, a grid oracle for certification and the
axisymmetric disc/catenoid comparison.
"""
from .anisotropy import Norm2D, certify_strict_ball, l1, l2, linf, lp, parse_norm, regularized_sequence
from .boundary import BoundaryFunction, Jump, MollificationKernel, extend_truncated, mollify
from .chord_solver import SolutionField, solve, solve_with_regularization, trace_deviation
from .estimators import GridOracle, LeastGradientSolver, TruncationSolver
from .exceptions import LGSolveError
from .geometry import Domain, Halfplane, UnboundedDomain, disc, supporting_halfplane, truncate
from .grid_oracle import verify_least_gradient
from .unbounded import (TruncationSchedule, certify_strip_bv, solve_c0_unique, solve_unbounded, steer_nonunique,
                        verify_single_escape)

__version__ = "0.1.0"

__all__ = [
    "BoundaryFunction",
    "Domain",
    "GridOracle",
    "Halfplane",
    "Jump",
    "LGSolveError",
    "LeastGradientSolver",
    "MollificationKernel",
    "Norm2D",
    "SolutionField",
    "TruncationSchedule",
    "TruncationSolver",
    "UnboundedDomain",
    "certify_strict_ball",
    "certify_strip_bv",
    "disc",
    "extend_truncated",
    "l1",
    "l2",
    "linf",
    "lp",
    "mollify",
    "parse_norm",
    "regularized_sequence",
    "solve",
    "solve_c0_unique",
    "solve_unbounded",
    "solve_with_regularization",
    "steer_nonunique",
    "supporting_halfplane",
    "trace_deviation",
    "truncate",
    "verify_least_gradient",
    "verify_single_escape",
]
