"""
rdident - Identificacion de parametros en redes de reaccion-difusion
====================================================================

Redes de accion de masas con difusion sobre una malla 2D enmascarada:
validacion estructural de la red, solver directo que preserva
positividad, adjunto discreto, gradientes respecto de difusividades,
constantes de velocidad y campos iniciales, y un optimizador L-BFGS
proyectado sobre la caja de parametros.

Uso basico:
    >>> from rdident import load_network, SpatialGrid, TimeAxis, IdentificationProblem
    >>> network = load_network('three-protein')
    >>> grid = SpatialGrid.disk(32, 32, 1 / 32, 1 / 32)
    >>> problem = IdentificationProblem.build(network, grid, TimeAxis(1.0, 100), ['pCA'])

Logging:
    >>> from rdident import get_logger
    >>> logger = get_logger(__name__)
"""

__version__ = '1.0.0'

from .core.filters import RunContextFilter, ThrottleFilter
from .core.formatters import ColoredFormatter, JSONFormatter
from .core.handlers import IterationLogConfig, IterationLogHandler
from .core.logger import LogConfig, LoggerManager, LogLevel
from .exceptions import (
    ConfigError,
    DimensionMismatch,
    FormatError,
    GradientCheckFailure,
    LineSearchFailure,
    NetworkError,
    NonCompliantNetwork,
    RdidentError,
    SolverError,
)
from .fieldfile import FieldFile
from .identification import (
    CoordinateMap,
    DataSet,
    ExternalFields,
    GradientSet,
    IdentificationProblem,
    OptimizerSettings,
    ParameterSet,
    ParameterSpace,
    full_gradient,
    gradient_check,
    optimize,
    project,
)
from .network import ReactionNetwork, certify, load_network, validate_assumptions
from .numerics import SpatialGrid, TimeAxis, integrate, solve_adjoint, solve_forward
from .utils import (
    get_iteration_logger,
    get_logger,
    get_logger_manager,
    initialize_from_env,
    initialize_logging,
    log_execution,
    reset_logging,
)

__all__ = [
    '__version__',
    # Logging
    'ColoredFormatter',
    'IterationLogConfig',
    'IterationLogHandler',
    'JSONFormatter',
    'LogConfig',
    'LogLevel',
    'LoggerManager',
    'RunContextFilter',
    'ThrottleFilter',
    'get_iteration_logger',
    'get_logger',
    'get_logger_manager',
    'initialize_from_env',
    'initialize_logging',
    'log_execution',
    'reset_logging',
    # Errores
    'ConfigError',
    'DimensionMismatch',
    'FormatError',
    'GradientCheckFailure',
    'LineSearchFailure',
    'NetworkError',
    'NonCompliantNetwork',
    'RdidentError',
    'SolverError',
    # Modelo y numerica
    'FieldFile',
    'ReactionNetwork',
    'SpatialGrid',
    'TimeAxis',
    'certify',
    'integrate',
    'load_network',
    'solve_adjoint',
    'solve_forward',
    'validate_assumptions',
    # Identificacion
    'CoordinateMap',
    'DataSet',
    'ExternalFields',
    'GradientSet',
    'IdentificationProblem',
    'OptimizerSettings',
    'ParameterSet',
    'ParameterSpace',
    'full_gradient',
    'gradient_check',
    'optimize',
    'project',
]
