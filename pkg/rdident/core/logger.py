"""
Gestor centralizado de logging.

Este modulo contiene las clases principales:
- LogLevel: Niveles de logging
- LogConfig: Configuracion del sistema
- LoggerManager: Gestor centralizado (Singleton por nombre)
"""

import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from .filters import RunContextFilter, ThrottleFilter
from .formatters import ColoredFormatter, JSONFormatter

# logger hijo de los registros de iteracion, independiente del nivel
ITERATION_LOGGER = 'iterations'


def _env_flag(name: str, default: str = 'false') -> bool:
    return os.getenv(name, default).strip().lower() in ('1', 'true', 'yes', 'on')


class LogLevel:
    """
    Niveles de logging disponibles (los estandar de Python).

    Attributes:
        DEBUG: Detalle por paso de tiempo y por solve lineal (10)
        INFO: Progreso de comandos e iteraciones (20)
        WARNING: Situaciones numericas sospechosas (30)
        ERROR: Fallo de un comando (40)
        CRITICAL: Error grave (50)
    """
    DEBUG = logging.DEBUG       # 10
    INFO = logging.INFO         # 20
    WARNING = logging.WARNING   # 30
    ERROR = logging.ERROR       # 40
    CRITICAL = logging.CRITICAL  # 50

    @classmethod
    def from_string(cls, level: str) -> int:
        """
        Convierte string a nivel de logging.

        Args:
            level: Nombre del nivel ('DEBUG', 'INFO', etc.)

        Returns:
            Valor numerico del nivel (INFO si el nombre no existe)
        """
        return getattr(cls, str(level).upper(), cls.INFO)


@dataclass
class LogConfig:
    """
    Configuracion para el sistema de logging.

    Attributes:
        name: Nombre del logger raiz del paquete
        level: Nivel de logging
        log_dir: Directorio para el archivo de log (None = sin archivo)
        console_output: Si se escribe en stderr
        file_output: Si se escribe en ``<log_dir>/<name>.log``
        json_format: Si se usa una linea JSON por registro
        run_id: Identificador de la corrida, inyectado en cada registro
        command: Comando de la CLI en ejecucion
        max_repeats: Limite de advertencias repetidas (0 = sin limite)
        extra_handlers: Handlers adicionales del logger raiz

    Example:
        >>> config = LogConfig(level="DEBUG", command="simulate")
    """
    name: str = "rdident"
    level: int = LogLevel.INFO
    log_dir: Optional[Path] = None
    console_output: bool = True
    file_output: bool = False
    json_format: bool = False
    run_id: str = ""
    command: str = ""
    max_repeats: int = 5
    extra_handlers: List[logging.Handler] = field(default_factory=list)

    def __post_init__(self):
        if isinstance(self.level, str):
            self.level = LogLevel.from_string(self.level)

        if isinstance(self.log_dir, str):
            self.log_dir = Path(self.log_dir) if self.log_dir else None


class LoggerManager:
    """
    Gestor centralizado de logging de rdident.

    Implementa el patron Singleton: una instancia por nombre de logger.
    La consola usa stderr para no mezclar logs con los reportes CSV que
    los comandos escriben en stdout.

    Example:
        >>> manager = LoggerManager(LogConfig(level="DEBUG"))
        >>> logger = manager.get_logger("numerics.forward")
        >>> logger.info("Integracion iniciada")
    """

    _instances: Dict[str, 'LoggerManager'] = {}

    def __new__(cls, config: LogConfig):
        key = config.name

        if key not in cls._instances:
            instance = super().__new__(cls)
            cls._instances[key] = instance

        return cls._instances[key]

    def __init__(self, config: LogConfig):
        # Evitar reinicializacion en Singleton
        if hasattr(self, '_initialized'):
            return

        self.config = config
        self._loggers: Dict[str, logging.Logger] = {}
        self.context_filter = RunContextFilter(config.run_id, config.command)
        self.throttle_filters: List[ThrottleFilter] = []
        self._setup_logging()
        self._initialized = True

    def _setup_logging(self) -> None:
        """Configura el logger raiz del paquete."""
        root_logger = logging.getLogger(self.config.name)
        root_logger.setLevel(self.config.level)

        for handler in list(root_logger.handlers):
            root_logger.removeHandler(handler)
            handler.close()

        if self.config.console_output:
            root_logger.addHandler(self._decorate(self._create_console_handler()))

        if self.config.file_output:
            root_logger.addHandler(self._decorate(self._create_file_handler()))

        for handler in self.config.extra_handlers:
            self.add_handler(handler)

        root_logger.propagate = False

    def _decorate(self, handler: logging.Handler) -> logging.Handler:
        # Los filtros van en los handlers: los registros de loggers hijos
        # no pasan por los filtros del logger raiz. Cada handler cuenta sus
        # propias repeticiones.
        throttle = ThrottleFilter(self.config.max_repeats)
        self.throttle_filters.append(throttle)
        handler.addFilter(self.context_filter)
        handler.addFilter(throttle)
        return handler

    def _create_console_handler(self) -> logging.Handler:
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(self.config.level)

        if self.config.json_format:
            formatter = JSONFormatter()
        else:
            fmt = '%(levelname)s | %(asctime)s | %(name)s | %(message)s'
            formatter = ColoredFormatter(
                fmt=fmt,
                datefmt='%Y-%m-%d %H:%M:%S',
                use_colors=sys.stderr.isatty()
            )

        handler.setFormatter(formatter)
        return handler

    def _create_file_handler(self) -> logging.Handler:
        if not self.config.log_dir:
            self.config.log_dir = Path('logs')
        self.config.log_dir.mkdir(parents=True, exist_ok=True)

        log_file = self.config.log_dir / f"{self.config.name}.log"
        handler = logging.FileHandler(log_file, encoding='utf-8')
        handler.setLevel(self.config.level)

        if self.config.json_format:
            formatter = JSONFormatter()
        else:
            fmt = (
                '%(asctime)s | %(levelname)s | %(run_id)s | %(command)s | '
                '%(name)s | %(module)s.%(funcName)s:%(lineno)d | %(message)s'
            )
            formatter = ColoredFormatter(
                fmt, datefmt='%Y-%m-%d %H:%M:%S', use_colors=False
            )

        handler.setFormatter(formatter)
        return handler

    def get_logger(self, name: Optional[str] = None) -> logging.Logger:
        """
        Obtiene un logger hijo del logger raiz del paquete.

        Args:
            name: Nombre relativo (``numerics.forward``) o absoluto
                  (``rdident.numerics.forward``); None devuelve el raiz

        Returns:
            Logger configurado
        """
        if not name or name == self.config.name:
            logger_name = self.config.name
        elif name.startswith(f"{self.config.name}."):
            logger_name = name
        else:
            logger_name = f"{self.config.name}.{name}"

        if logger_name not in self._loggers:
            self._loggers[logger_name] = logging.getLogger(logger_name)

        return self._loggers[logger_name]

    def set_context(self, run_id: Optional[str] = None, command: Optional[str] = None) -> None:
        """Actualiza el contexto de corrida inyectado en los registros."""
        if run_id is not None:
            self.context_filter.run_id = run_id
            self.config.run_id = run_id
        if command is not None:
            self.context_filter.command = command
            self.config.command = command

    def log_exception(
        self,
        logger: logging.Logger,
        exception: Exception,
        message: str = "Excepcion capturada"
    ) -> None:
        """
        Registra una excepcion con su traceback y tipo.

        Example:
            >>> try:
            ...     solve_forward(problem, theta)
            ... except SolverError as e:
            ...     manager.log_exception(logger, e, "Fallo la integracion")
        """
        logger.error(
            f"{message}: {exception}",
            exc_info=logger.isEnabledFor(logging.DEBUG),
            extra={
                'extra_fields': {
                    'exception_type': type(exception).__name__,
                    'exit_code': getattr(exception, 'exit_code', 1),
                }
            }
        )

    def add_handler(self, handler: logging.Handler) -> None:
        """Agrega un handler adicional al logger raiz."""
        root_logger = logging.getLogger(self.config.name)
        handler.addFilter(self.context_filter)
        root_logger.addHandler(handler)

    def remove_handler(self, handler: logging.Handler) -> None:
        """Quita y cierra un handler agregado con ``add_handler``."""
        logging.getLogger(self.config.name).removeHandler(handler)
        handler.close()

    def get_iteration_logger(self) -> logging.Logger:
        """
        Logger de los registros de iteracion, ``<name>.iterations``.

        Tiene nivel INFO propio y no propaga, de modo que el CSV de
        iteraciones no depende del nivel del resto del paquete.
        """
        logger = logging.getLogger(f"{self.config.name}.{ITERATION_LOGGER}")
        logger.setLevel(LogLevel.INFO)
        logger.propagate = False
        return logger

    def add_iteration_handler(self, handler: logging.Handler) -> None:
        """Agrega un handler (p. ej. IterationLogHandler) al logger de iteraciones."""
        handler.addFilter(self.context_filter)
        self.get_iteration_logger().addHandler(handler)

    def remove_iteration_handler(self, handler: logging.Handler) -> None:
        self.get_iteration_logger().removeHandler(handler)
        handler.close()

    @classmethod
    def create_from_dict(cls, config_dict: Dict[str, Any]) -> 'LoggerManager':
        return cls(LogConfig(**config_dict))

    @classmethod
    def create_from_env(cls) -> 'LoggerManager':
        """
        Crea un LoggerManager desde variables de entorno.

        Variables:
            - RDIDENT_LOG_LEVEL: Nivel de logging (default INFO)
            - RDIDENT_LOG_DIR: Directorio del archivo de log
            - RDIDENT_LOG_JSON: true/false para formato JSON
            - RDIDENT_LOG_CONSOLE: true/false para salida por stderr
            - RDIDENT_LOG_FILE: true/false para salida a archivo
        """
        log_dir = os.getenv('RDIDENT_LOG_DIR')

        config = LogConfig(
            level=os.getenv('RDIDENT_LOG_LEVEL', 'INFO'),
            log_dir=Path(log_dir) if log_dir else None,
            console_output=_env_flag('RDIDENT_LOG_CONSOLE', 'true'),
            file_output=_env_flag('RDIDENT_LOG_FILE'),
            json_format=_env_flag('RDIDENT_LOG_JSON'),
        )

        return cls(config)

    @classmethod
    def reset_instances(cls) -> None:
        """Resetea todas las instancias y cierra sus handlers (tests)."""
        for manager in cls._instances.values():
            for name in (manager.config.name, f"{manager.config.name}.{ITERATION_LOGGER}"):
                logger = logging.getLogger(name)
                for handler in list(logger.handlers):
                    logger.removeHandler(handler)
                    handler.close()
        cls._instances.clear()
