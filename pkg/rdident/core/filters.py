"""
Filtros de logging.

- RunContextFilter: agrega el identificador de corrida y el comando
- ThrottleFilter: limita advertencias repetidas (una por paso de tiempo)
"""

import logging
import threading
from collections import Counter

SUPPRESSED_NOTE = ' (mensajes repetidos suprimidos)'


class RunContextFilter(logging.Filter):
    """
    Inyecta ``run_id`` y ``command`` en cada registro.

    Example:
        >>> logger.addFilter(RunContextFilter(run_id='twin-01', command='identify'))
    """

    def __init__(self, run_id: str = '', command: str = ''):
        super().__init__()
        self.run_id = run_id
        self.command = command

    def filter(self, record: logging.LogRecord) -> bool:
        record.run_id = self.run_id
        record.command = self.command
        return True


class ThrottleFilter(logging.Filter):
    """
    Deja pasar a lo sumo ``max_repeats`` advertencias con el mismo mensaje.

    Los niveles por debajo de WARNING no se limitan. El registro que
    alcanza el limite pasa con ``record.throttled = True`` y los
    formateadores le agregan SUPPRESSED_NOTE; el mensaje no se modifica.
    Cada handler necesita su propia instancia.
    """

    def __init__(self, max_repeats: int = 5):
        super().__init__()
        self.max_repeats = max_repeats
        self._counts: Counter = Counter()
        self._lock = threading.Lock()

    def filter(self, record: logging.LogRecord) -> bool:
        if record.levelno < logging.WARNING or self.max_repeats <= 0:
            return True

        key = (record.name, record.msg)
        with self._lock:
            self._counts[key] += 1
            seen = self._counts[key]

        if seen < self.max_repeats:
            return True
        if seen == self.max_repeats:
            record.throttled = True
            return True
        return False

    def suppressed(self) -> int:
        """Numero total de registros descartados."""
        with self._lock:
            return sum(
                max(0, count - self.max_repeats) for count in self._counts.values()
            )

    def reset(self) -> None:
        with self._lock:
            self._counts.clear()
