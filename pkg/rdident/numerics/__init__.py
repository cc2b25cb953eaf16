"""
Solvers numericos: malla, gradiente conjugado, integrador directo y adjunto.
"""

from .adjoint import AdjointTrajectory, ObservationOperator, adjoint_step, residual, solve_adjoint
from .forward import StateTrajectory, TimeAxis, integrate, solve_forward, step
from .grid import SpatialGrid, load_mask
from .linalg import ImplicitDiffusionOperator, LinearSolveResult, batched_cg, linear_solve

__all__ = [
    'SpatialGrid',
    'load_mask',
    'LinearSolveResult',
    'ImplicitDiffusionOperator',
    'batched_cg',
    'linear_solve',
    'TimeAxis',
    'StateTrajectory',
    'step',
    'integrate',
    'solve_forward',
    'ObservationOperator',
    'AdjointTrajectory',
    'residual',
    'adjoint_step',
    'solve_adjoint',
]
