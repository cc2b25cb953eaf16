"""
Componentes de logging de rdident.

- LoggerManager, LogConfig, LogLevel
- Formatters, Filters y el handler CSV de iteraciones
"""

from .logger import LoggerManager, LogConfig, LogLevel
from .handlers import IterationLogHandler, IterationLogConfig, ITERATION_COLUMNS
from .formatters import ColoredFormatter, JSONFormatter
from .filters import RunContextFilter, ThrottleFilter

__all__ = [
    'LoggerManager',
    'LogConfig',
    'LogLevel',
    'IterationLogHandler',
    'IterationLogConfig',
    'ITERATION_COLUMNS',
    'ColoredFormatter',
    'JSONFormatter',
    'RunContextFilter',
    'ThrottleFilter',
]
