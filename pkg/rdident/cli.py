"""
Punto de entrada de la linea de comandos.

Uso:
    rdident validate three-protein
    rdident simulate twin.ini --noise 0.01 --seed 7
    rdident gradcheck twin.ini --threshold 5e-3
    rdident identify twin.ini
    rdident export output/fitted.rdrd --stats

Codigos de salida: 0 correcto, 1 error de entrada, 2 red no conforme,
3 gradiente fuera de tolerancia, 4 optimizacion sin converger.
"""

import argparse
import sys
from typing import Optional, Sequence, TextIO

from . import __version__
from .commands import COMMANDS
from .core.logger import LogLevel
from .utils import initialize_logging


def build_parser(stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='rdident',
        description='Identificacion de parametros en redes de reaccion-difusion',
    )
    parser.add_argument('--version', action='version', version=f'rdident {__version__}')
    parser.add_argument(
        '--log-level',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
        default=None,
        help='Nivel de logging (por defecto el de la configuracion o RDIDENT_LOG_LEVEL)'
    )
    parser.add_argument('--log-json', action='store_true', help='Logs como JSON por linea')
    parser.add_argument('--run-id', default=None, help='Identificador de corrida en los logs')

    subparsers = parser.add_subparsers(dest='command_name', metavar='comando')
    subparsers.required = True
    for command_class in COMMANDS.values():
        command_class(stdout, stderr).create_parser(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    parser = build_parser(stdout, stderr)
    options = vars(parser.parse_args(argv))
    command = options.pop('command')

    if options.get('log_level') or options.get('log_json') or not command.uses_config:
        initialize_logging(
            level=LogLevel.from_string(options.get('log_level') or 'INFO'),
            json_format=bool(options.get('log_json')),
            command=command.name,
            run_id=options.get('run_id') or '',
        )
    return command.execute(**options)


if __name__ == '__main__':
    sys.exit(main())
