"""
rdident simulate <config>

Integra el modelo y escribe F u (y opcionalmente u completo) como
archivos RDRD en el directorio de salida, junto con el theta usado.
"""

from ..identification.parameters import write_parameters
from ..workflow import simulate
from .base import BaseCommand


class Command(BaseCommand):
    name = 'simulate'
    help = 'Integra el modelo directo y escribe la trayectoria observada'
    uses_config = True

    def add_arguments(self, parser):
        parser.add_argument('--noise', type=float, default=None, help='Desvio del ruido gaussiano')
        parser.add_argument('--seed', type=int, default=None, help='Semilla (64 bits)')
        parser.add_argument(
            '--full-state',
            action='store_true',
            default=None,
            help='Escribe tambien el estado completo'
        )
        parser.add_argument('--output', default=None, help='Archivo RDRD de salida (por defecto <output>/observed.rdrd)')

    def handle(self, **options) -> int:
        config = self.load_config(options)
        result = simulate(config, options.get('noise'), options.get('seed'), options.get('full_state'))

        output_dir = config.paths.output
        target = options.get('output') or output_dir / 'observed.rdrd'
        path = result.observed.write(target)
        self.stdout.write(self.style.SUCCESS(f"Trayectoria observada: {path}"))

        if result.full_state is not None:
            full = result.full_state.write(output_dir / 'state.rdrd')
            self.stdout.write(f"Estado completo: {full}")

        theta_path = write_parameters(result.theta, output_dir / 'theta_true.txt', result.trajectory.grid)
        self.stdout.write(f"Parametros: {theta_path}")
        return 0
