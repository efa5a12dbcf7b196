"""Numerical tolerances shared across the package."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    norm: float = 1e-10
    orthogonality: float = 1e-9
    # mean-spin length below degeneracy * N has no defined direction
    degeneracy: float = 1e-8
    # magnitude of an extreme coefficient under which the float sum is
    # recomputed in extended precision
    cancellation: float = 1e-6
    krylov_residual: float = 1e-12
    correlator_slack: float = 1e-12


TOL = Tolerances()
