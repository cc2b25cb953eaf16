"""
Formateadores de logging.

- ColoredFormatter: salida con colores ANSI y campos estructurados
  anexados como key=value (consola interactiva)
- JSONFormatter: una linea JSON por registro (corridas batch)
"""

import json
import logging
from datetime import datetime, timezone
from typing import Any, Dict

import numpy as np

from .filters import SUPPRESSED_NOTE


def _plain(value: Any) -> Any:
    """Convierte escalares y arreglos de numpy a tipos serializables."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


class ColoredFormatter(logging.Formatter):
    """
    Formateador con colores para la consola.

    Ademas del color por nivel, agrega al final del mensaje los campos de
    ``extra_fields`` (por ejemplo el costo y la norma del gradiente
    proyectado de cada iteracion).

    Example:
        >>> handler = logging.StreamHandler()
        >>> handler.setFormatter(ColoredFormatter('%(levelname)s | %(message)s'))
    """

    COLORS = {
        'DEBUG': '\033[36m',     # Cyan
        'INFO': '\033[32m',      # Green
        'WARNING': '\033[33m',   # Yellow
        'ERROR': '\033[31m',     # Red
        'CRITICAL': '\033[35m',  # Magenta
        'RESET': '\033[0m'
    }

    def __init__(self, *args, use_colors: bool = True, **kwargs):
        super().__init__(*args, **kwargs)
        self.use_colors = use_colors

    def format(self, record: logging.LogRecord) -> str:
        levelname = record.levelname

        if self.use_colors and levelname in self.COLORS:
            record.levelname = (
                f"{self.COLORS[levelname]}{levelname}"
                f"{self.COLORS['RESET']}"
            )

        try:
            result = super().format(record)
        finally:
            record.levelname = levelname

        if getattr(record, 'throttled', False):
            result = f"{result}{SUPPRESSED_NOTE}"

        extra = getattr(record, 'extra_fields', None)
        if extra:
            pairs = ' '.join(
                f"{key}={self._render(value)}" for key, value in extra.items()
            )
            result = f"{result} | {pairs}"

        return result

    @staticmethod
    def _render(value: Any) -> str:
        value = _plain(value)
        if isinstance(value, float):
            return f"{value:.6g}"
        return str(value)


class JSONFormatter(logging.Formatter):
    """
    Formateador que genera una linea JSON por registro.

    Los campos de ``extra_fields`` se agregan en la raiz del objeto; los
    valores de numpy se convierten a tipos nativos.
    """

    def format(self, record: logging.LogRecord) -> str:
        message = record.getMessage()
        if getattr(record, 'throttled', False):
            message += SUPPRESSED_NOTE

        log_data: Dict[str, Any] = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'level': record.levelname,
            'logger': record.name,
            'message': message,
            'module': record.module,
            'function': record.funcName,
            'line': record.lineno
        }

        if record.exc_info:
            log_data['exception'] = self.formatException(record.exc_info)

        for attribute in ('run_id', 'command'):
            if getattr(record, attribute, None):
                log_data[attribute] = getattr(record, attribute)

        if hasattr(record, 'extra_fields'):
            log_data.update(
                {key: _plain(value) for key, value in record.extra_fields.items()}
            )

        return json.dumps(log_data, default=str, ensure_ascii=False)
