"""
Handlers de logging.

- IterationLogHandler: escribe de forma asincrona el registro de
  iteraciones del optimizador en un CSV de solo agregado
"""

import csv
import logging
import queue
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

ITERATION_COLUMNS = (
    'iteration',
    'cost',
    'projected_gradient_norm',
    'step_length',
    'line_search_trials',
    'wall_time',
)


@dataclass
class IterationLogConfig:
    """
    Configuracion del log de iteraciones.

    Attributes:
        path: Archivo CSV de destino
        columns: Columnas en orden; las claves ausentes quedan vacias
        buffer_size: Capacidad de la cola de escritura
        flush_interval: Segundos de espera del hilo escritor entre lecturas
        key: Campo de ``extra_fields`` que identifica un registro de iteracion
    """
    path: Union[str, Path] = 'iterations.csv'
    columns: Sequence[str] = field(default_factory=lambda: ITERATION_COLUMNS)
    buffer_size: int = 10000
    flush_interval: float = 0.5
    key: str = 'iteration'

    def __post_init__(self):
        self.path = Path(self.path)
        self.columns = tuple(self.columns)


class IterationLogHandler(logging.Handler):
    """
    Handler que vuelca los registros de iteracion a CSV en un hilo aparte.

    Solo procesa registros cuyo ``extra_fields`` contiene la clave
    configurada (por defecto ``iteration``); el resto se ignora. Cada fila
    se escribe y se sincroniza de inmediato, de modo que el archivo puede
    leerse mientras la optimizacion avanza.

    Example:
        >>> handler = IterationLogHandler(IterationLogConfig(path='out/iterations.csv'))
        >>> logging.getLogger('rdident').addHandler(handler)
    """

    def __init__(self, config: Optional[IterationLogConfig] = None):
        super().__init__()

        self.config = config or IterationLogConfig()
        self.log_queue: queue.Queue = queue.Queue(maxsize=self.config.buffer_size)
        self.writer_thread: Optional[threading.Thread] = None
        self.running = False
        self.rows_written = 0
        self.rows_failed = 0
        self._stream = None
        self._writer = None

        self._open()
        self._start_writer_thread()

    def _open(self) -> None:
        self.config.path.parent.mkdir(parents=True, exist_ok=True)
        new_file = not self.config.path.exists() or self.config.path.stat().st_size == 0
        self._stream = open(self.config.path, 'a', newline='', encoding='utf-8')
        self._writer = csv.writer(self._stream)
        if new_file:
            self._writer.writerow(self.config.columns)
            self._stream.flush()

    def _start_writer_thread(self) -> None:
        self.running = True
        self.writer_thread = threading.Thread(
            target=self._writer_loop,
            daemon=True,
            name="IterationLogWriter"
        )
        self.writer_thread.start()

    def _writer_loop(self) -> None:
        while self.running or not self.log_queue.empty():
            try:
                row = self.log_queue.get(timeout=self.config.flush_interval)
            except queue.Empty:
                continue

            try:
                self._write_row(row)
            finally:
                self.log_queue.task_done()

    def _write_row(self, row: List[Any]) -> None:
        try:
            self._writer.writerow(row)
            self._stream.flush()
            self.rows_written += 1
        except (OSError, ValueError):
            self.rows_failed += 1

    def _prepare_row(self, fields: Dict[str, Any]) -> List[Any]:
        row = []
        for column in self.config.columns:
            value = fields.get(column, '')
            if hasattr(value, 'item'):
                value = value.item()
            if isinstance(value, float):
                value = repr(value)
            row.append(value)
        return row

    def emit(self, record: logging.LogRecord) -> None:
        fields = getattr(record, 'extra_fields', None)
        if not fields or self.config.key not in fields:
            return

        row = self._prepare_row(fields)
        try:
            self.log_queue.put(row, timeout=self.config.flush_interval)
        except queue.Full:
            self.rows_failed += 1

    def flush(self) -> None:
        """Espera a que todas las filas encoladas esten escritas."""
        if self.running:
            self.log_queue.join()

    def close(self) -> None:
        self.flush()
        self.running = False

        if self.writer_thread:
            self.writer_thread.join(timeout=10)

        if self._stream:
            self._stream.close()
            self._stream = None

        super().close()

    def get_statistics(self) -> Dict[str, Any]:
        return {
            'rows_written': self.rows_written,
            'rows_failed': self.rows_failed,
            'queue_size': self.log_queue.qsize(),
            'path': str(self.config.path),
        }
