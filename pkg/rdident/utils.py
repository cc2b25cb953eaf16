"""
Utilidades de logging para rdident.

Funciones helper para inicializar y usar el sistema de logging desde
la CLI, los solvers y los tests.
"""

import logging
import os
import time
from functools import wraps
from pathlib import Path
from typing import Optional

from .core.logger import LoggerManager, LogConfig, LogLevel, _env_flag
from .exceptions import RdidentError


# Variable global para el gestor de logging
_logger_manager: Optional[LoggerManager] = None


def initialize_logging(
    config: Optional[LogConfig] = None,
    **kwargs
) -> LoggerManager:
    """
    Inicializa el sistema de logging.

    Args:
        config: Objeto LogConfig o None
        **kwargs: Argumentos para crear LogConfig si config es None; sin
                  argumentos se usan las variables de entorno

    Returns:
        Instancia de LoggerManager

    Example:
        >>> initialize_logging(level="DEBUG", command="gradcheck")
    """
    global _logger_manager

    if config is None:
        if not kwargs:
            return initialize_from_env()
        config = LogConfig(**kwargs)

    if _logger_manager is not None:
        reset_logging()

    _logger_manager = LoggerManager(config)
    return _logger_manager


def initialize_from_env() -> LoggerManager:
    """
    Inicializa el logging desde variables de entorno.

    Variables de entorno:
        RDIDENT_LOG_LEVEL: Nivel de logging (default: "INFO")
        RDIDENT_LOG_DIR: Directorio para el archivo de log
        RDIDENT_LOG_CONSOLE: "true"/"false" para salida por stderr
        RDIDENT_LOG_FILE: "true"/"false" para salida a archivo
        RDIDENT_LOG_JSON: "true"/"false" para formato JSON

    Returns:
        Instancia de LoggerManager
    """
    global _logger_manager

    log_dir = os.getenv('RDIDENT_LOG_DIR')

    config = LogConfig(
        level=LogLevel.from_string(os.getenv('RDIDENT_LOG_LEVEL', 'INFO')),
        log_dir=Path(log_dir) if log_dir else None,
        console_output=_env_flag('RDIDENT_LOG_CONSOLE', 'true'),
        file_output=_env_flag('RDIDENT_LOG_FILE'),
        json_format=_env_flag('RDIDENT_LOG_JSON'),
    )

    _logger_manager = LoggerManager(config)
    return _logger_manager


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    Obtiene un logger configurado.

    Si el sistema no esta inicializado, lo inicializa desde variables de
    entorno.

    Example:
        >>> logger = get_logger(__name__)
        >>> logger.debug("Paso %d resuelto", 10)
    """
    global _logger_manager

    if _logger_manager is None:
        initialize_from_env()

    return _logger_manager.get_logger(name)


def get_iteration_logger() -> logging.Logger:
    """
    Logger de los registros de iteracion del optimizador.

    No depende del nivel configurado: ``identify`` escribe el CSV de
    iteraciones aun con ``--log-level ERROR``.
    """
    global _logger_manager

    if _logger_manager is None:
        initialize_from_env()

    return _logger_manager.get_iteration_logger()


def get_logger_manager() -> Optional[LoggerManager]:
    """Obtiene la instancia global del LoggerManager (o None)."""
    return _logger_manager


def reset_logging() -> None:
    """Resetea el sistema de logging (util para tests y para la CLI)."""
    global _logger_manager
    _logger_manager = None
    LoggerManager.reset_instances()


def log_execution(
    logger_name: Optional[str] = None,
    level: str = "DEBUG"
):
    """
    Decorador que registra entrada, duracion y errores de una funcion.

    Los RdidentError se registran al nivel del decorador con su codigo de
    salida (quien los captura decide si son fatales); cualquier otra
    excepcion va a ERROR.

    Example:
        >>> @log_execution(level="INFO")
        ... def solve_forward(problem, theta):
        ...     ...
    """
    numeric_level = LogLevel.from_string(level)

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            logger = get_logger(logger_name or func.__module__)
            if not logger.isEnabledFor(logging.ERROR):
                return func(*args, **kwargs)
            enabled = logger.isEnabledFor(numeric_level)

            if enabled:
                logger.log(numeric_level, f"Ejecutando {func.__name__}")

            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except RdidentError as e:
                if enabled:
                    logger.log(
                        numeric_level,
                        f"{func.__name__} interrumpido: {e}",
                        extra={'extra_fields': {
                            'function': func.__name__,
                            'exception_type': type(e).__name__,
                            'exit_code': e.exit_code,
                        }}
                    )
                raise
            except Exception as e:
                logger.error(
                    f"Error en {func.__name__}: {e}",
                    extra={
                        'extra_fields': {
                            'function': func.__name__,
                            'exception_type': type(e).__name__
                        }
                    }
                )
                raise

            if enabled:
                duration = time.perf_counter() - start_time
                logger.log(
                    numeric_level,
                    f"{func.__name__} completado en {duration:.3f}s",
                    extra={
                        'extra_fields': {
                            'function': func.__name__,
                            'duration_seconds': round(duration, 3)
                        }
                    }
                )
            return result

        return wrapper

    return decorator
