"""
Identificacion de parametros: caja de parametros, problema, gradiente
adjunto y optimizador.
"""

from .gradient import (
    GradientCheckReport,
    GradientCheckRow,
    GradientSet,
    TaylorResult,
    cost,
    evaluate_cost,
    full_gradient,
    grad_d,
    grad_I,
    grad_k,
    gradient_check,
    taylor_test,
)
from .optimizer import (
    IterationRecord,
    OptimizationResult,
    OptimizationStatus,
    OptimizerSettings,
    minimize_projected_lbfgs,
    optimize,
    projected_gradient_norm,
    two_loop_direction,
)
from .parameters import (
    PRESETS,
    CoordinateMap,
    ParameterSet,
    ParameterSpace,
    default_space,
    draw_parameters,
    project,
    read_parameters,
    smooth_random_field,
    write_parameters,
)
from .problem import DataSet, ExternalFields, IdentificationProblem, InitialMap

__all__ = [
    'CoordinateMap',
    'DataSet',
    'ExternalFields',
    'GradientCheckReport',
    'GradientCheckRow',
    'GradientSet',
    'IdentificationProblem',
    'InitialMap',
    'IterationRecord',
    'OptimizationResult',
    'OptimizationStatus',
    'OptimizerSettings',
    'PRESETS',
    'ParameterSet',
    'ParameterSpace',
    'TaylorResult',
    'cost',
    'default_space',
    'draw_parameters',
    'evaluate_cost',
    'full_gradient',
    'grad_I',
    'grad_d',
    'grad_k',
    'gradient_check',
    'minimize_projected_lbfgs',
    'optimize',
    'project',
    'projected_gradient_norm',
    'read_parameters',
    'smooth_random_field',
    'taylor_test',
    'two_loop_direction',
    'write_parameters',
]
