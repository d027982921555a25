"""Mobility edge of Levy random matrices: stable laws, the resolvent fixed
point, the eigenvalue lambda(E, alpha), and Monte Carlo cross-checks on trees
and finite matrices."""

from .edge import (C_STAR, EdgeConstants, EdgeSolution, MobilityEdge, edge_constants, ell, fg_gamma,
                   lambda_, lambda_s, lambda_zero_closed, mobility_edge, solve_ab)
from .rde import BoundaryPair, ResolventPopulation, run_population
from .stable import ConvergenceError, StableParams, sample_stable, stable_cdf, stable_density

__all__ = [
    "C_STAR",
    "BoundaryPair",
    "ConvergenceError",
    "EdgeConstants",
    "EdgeSolution",
    "MobilityEdge",
    "ResolventPopulation",
    "StableParams",
    "edge_constants",
    "ell",
    "fg_gamma",
    "lambda_",
    "lambda_s",
    "lambda_zero_closed",
    "mobility_edge",
    "run_population",
    "sample_stable",
    "solve_ab",
    "stable_cdf",
    "stable_density",
]
