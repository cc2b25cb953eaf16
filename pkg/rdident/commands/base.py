"""
Base de los comandos de la CLI.

Cada comando declara ``name``, ``help``, ``add_arguments`` y ``handle``;
``handle`` devuelve el codigo de salida. ``execute`` traduce las
excepciones de rdident a su ``exit_code`` y las registra.
"""

import argparse
import sys
from typing import Optional, TextIO

from ..config import RunConfig
from ..core.formatters import ColoredFormatter
from ..exceptions import RdidentError
from ..utils import get_logger, get_logger_manager, initialize_logging


class Style:
    """Colores de salida, los mismos que usa ColoredFormatter por nivel."""

    def __init__(self, use_colors: bool = True):
        self.use_colors = use_colors

    def _paint(self, level: str, text: str) -> str:
        if not self.use_colors:
            return text
        colors = ColoredFormatter.COLORS
        return f"{colors[level]}{text}{colors['RESET']}"

    def SUCCESS(self, text: str) -> str:
        return self._paint('INFO', text)

    def WARNING(self, text: str) -> str:
        return self._paint('WARNING', text)

    def ERROR(self, text: str) -> str:
        return self._paint('ERROR', text)

    def HEADING(self, text: str) -> str:
        return self._paint('DEBUG', text)


class OutputWrapper:
    """Envuelve un stream de texto; ``write`` agrega salto de linea."""

    def __init__(self, stream: TextIO):
        self._stream = stream

    @property
    def stream(self) -> TextIO:
        return self._stream

    def write(self, text: str = '', ending: str = '\n') -> None:
        if ending and not text.endswith(ending):
            text += ending
        self._stream.write(text)

    def isatty(self) -> bool:
        return hasattr(self._stream, 'isatty') and self._stream.isatty()


class BaseCommand:
    """Comando base; las subclases sobrescriben ``add_arguments`` y ``handle``."""

    name = ''
    help = ''
    uses_config = False

    def __init__(self, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None):
        self.stdout = OutputWrapper(stdout or sys.stdout)
        self.stderr = OutputWrapper(stderr or sys.stderr)
        self.style = Style(self.stdout.isatty())
        self.logger = get_logger(f'commands.{self.name}')

    def create_parser(self, subparsers) -> argparse.ArgumentParser:
        parser = subparsers.add_parser(self.name, help=self.help, description=self.help)
        if self.uses_config:
            parser.add_argument('config', help='Archivo de configuracion INI')
            parser.add_argument(
                '--print-config',
                action='store_true',
                help='Imprime la configuracion canonica y termina'
            )
        self.add_arguments(parser)
        parser.set_defaults(command=self)
        return parser

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        pass

    def handle(self, **options) -> int:
        raise NotImplementedError('Las subclases de BaseCommand deben implementar handle()')

    def load_config(self, options) -> RunConfig:
        config = RunConfig.load(options['config'])
        if options.get('log_level'):
            config.logging.level = options['log_level']
        if options.get('log_json'):
            config.logging.json = True
        initialize_logging(config.logging.to_log_config(command=self.name, run_id=options.get('run_id') or ''))
        return config

    def execute(self, **options) -> int:
        manager = get_logger_manager()
        if manager is not None:
            manager.set_context(command=self.name)
        try:
            if self.uses_config and options.get('print_config'):
                self.stdout.write(RunConfig.load(options['config']).to_ini(), ending='')
                return 0
            return self.handle(**options)
        except RdidentError as exc:
            manager = get_logger_manager()
            if manager is not None:
                manager.log_exception(self.logger, exc, f"Fallo el comando {self.name}")
            self.stderr.write(self.style.ERROR(f"error: {exc}"))
            return exc.exit_code
